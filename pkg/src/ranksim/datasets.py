"""Paths to the bundled synthetic corpus and its companion files.

The bundle is a 30-document two-class corpus with a matching lexicon
classifier, synonym table, and stopword list, sized so a full grid run
finishes in minutes on a laptop. It exists for tests, demos, and
qualitative comparisons between measures; it is not a real dataset.
"""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

__all__ = [
    "data_dir",
    "bundled_corpus_path",
    "bundled_lexicon_path",
    "bundled_synonyms_path",
    "bundled_stopwords_path",
    "bundled_config_path",
]


def data_dir() -> Path:
    return Path(str(files("ranksim").joinpath("data")))


def bundled_corpus_path() -> Path:
    return data_dir() / "corpus.tsv"


def bundled_lexicon_path() -> Path:
    return data_dir() / "lexicon.tsv"


def bundled_synonyms_path() -> Path:
    return data_dir() / "synonyms.tsv"


def bundled_stopwords_path() -> Path:
    return data_dir() / "stopwords.txt"


def bundled_config_path() -> Path:
    return data_dir() / "config.json"
