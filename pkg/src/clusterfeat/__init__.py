"""Word-embedding cluster-membership features for NER and ordinal sentiment tasks."""

from .cluster import ClusterConfig, ClusterModel, fit_with_restarts, kmeanspp_init, lloyd_fit
from .embedio import EmbeddingTable, load_vectors
from .features import SentenceFeatureConfig, SentimentLexicon, combine
from .linmodel import LinearModel, TrainConfig
from .quantify import PrevalenceVector, classify_and_count, emd
from .sentiment import OrdinalScale, mae_macro
from .seqtag import TagScheme, TaggedSequence, decode_bio, encode_bio, entity_f1
from .textprep import PreprocessRules, preprocess, tokenize

__version__ = "0.1.0"
