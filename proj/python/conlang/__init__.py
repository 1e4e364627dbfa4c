import json

from ._core import (
    ConlangError,
    apply_sound_changes,
    cer,
    lemmas,
    mser,
    normalize_gloss,
    read,
    run_stage,
    sample_morphemes,
    spell,
    ter,
    wer,
)
from ._core import score_json as _score_json

__all__ = [
    "ConlangError",
    "apply_sound_changes",
    "cer",
    "lemmas",
    "mser",
    "normalize_gloss",
    "read",
    "run_stage",
    "sample_morphemes",
    "score",
    "spell",
    "ter",
    "wer",
]


def score(hyps, refs, alpha=0.5):
    """Corpus metric report as a dict; missing metrics are None."""
    return json.loads(_score_json(list(hyps), list(refs), alpha))
