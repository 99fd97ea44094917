"""Screening short social-media texts for supportive drug-use references.

Submodules
----------
lexicon     keyword vocabulary and phrase matching
corpus      cleaning, row filters, keyword attributes, candidate sets
synthgen    keyword-substitution data augmentation
embed       word-vector tables and fixed-size text windows
cnn         from-scratch convolutional text classifier
baselines   PCA + SVM / logistic regression / CART comparison models
evaluation  confusion matrices, metrics, ROC/AUC, Fleiss' kappa
rulemine    tag transactions, Apriori, association rules, HITS
"""

from .baselines import CartClassifier, HingeSVM, LogisticClassifier, MeanEmbeddingVectorizer, WordVectorPCA
from .cnn import CnnConfig, TextCNNClassifier
from .corpus import PostRecord, TextCleaner, clean_text
from .embed import EmbeddingTable, embed_tokens, load_vectors
from .lexicon import Kind, Lexicon, default_lexicon, load_lexicon, match_keywords
from .synthgen import SynthConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "CartClassifier",
    "CnnConfig",
    "EmbeddingTable",
    "HingeSVM",
    "Kind",
    "Lexicon",
    "LogisticClassifier",
    "MeanEmbeddingVectorizer",
    "PostRecord",
    "SynthConfig",
    "TextCNNClassifier",
    "TextCleaner",
    "WordVectorPCA",
    "clean_text",
    "default_lexicon",
    "embed_tokens",
    "generate_synthetic",
    "load_lexicon",
    "load_vectors",
    "match_keywords",
]
