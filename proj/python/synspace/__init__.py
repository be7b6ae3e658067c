"""Zero-shot classification over synonymous semantic spaces.

Thin Python surface over the C++ core: embedding I/O, topology filtering,
point-to-space metrics, catalogs and test-time adaptation.
"""

from ._synspace import (  # noqa: F401
    ClassCatalog,
    ClassLexicon,
    EmbeddingSet,
    SynspaceError,
    combine,
    compactness,
    cosine,
    largest_component,
    load_embeddings,
    load_lexicon_cache,
    make_lexicon,
    normalize,
    persistence_0d,
    render_descriptor_prompt,
    render_synonym_prompt,
    run_episode,
    save_embeddings,
    sim_point_to_center,
    sim_point_to_local_center,
    sim_point_to_set,
    sim_point_to_subspace,
)

__all__ = [name for name in dir() if not name.startswith("_")]
