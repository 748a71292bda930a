from .model import (
    FlatCorpus,
    LdaConfig,
    TopicModel,
    collapsed_conditional,
    fit,
    flatten_week,
    load_model,
    log_likelihood,
    minka_fixed_point,
    optimize_alpha,
    save_model,
    vocabulary_hash,
)

__all__ = [
    "FlatCorpus",
    "LdaConfig",
    "TopicModel",
    "collapsed_conditional",
    "fit",
    "flatten_week",
    "load_model",
    "log_likelihood",
    "minka_fixed_point",
    "optimize_alpha",
    "save_model",
    "vocabulary_hash",
]
