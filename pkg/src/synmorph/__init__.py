"""Syntax networks from CoNLL-U treebanks: node metrics, PCA morphospace and topological communities."""

from .communities import cut_assignment, label_communities, ward_dendrogram
from .compare import compare_languages, mean_properties
from .conllu import POSTag, corpus_census, parse_conllu, read_corpus
from .features import neighbor_stats, standardize
from .graph import SyntaxGraph, WordKey, build_network, giant_component
from .metrics import METRICS, primary_matrix
from .morphospace import cross_project, fit_pca, project, rgb_colors

__version__ = "0.1.0"
