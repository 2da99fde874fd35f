"""Scene-text editing pair synthesis and benchmark scoring."""

from ._textsculpt import (
    TextsculptError,
    __version__,
    align_words,
    background_preservation,
    derive_benchmark,
    directory_hash,
    evaluate,
    forge,
    gate,
    render_report,
    simulate_editor,
    text_accuracy,
    tokenize,
    vq_score,
    word_accuracy,
)

__all__ = [
    "TextsculptError",
    "__version__",
    "align_words",
    "background_preservation",
    "derive_benchmark",
    "directory_hash",
    "evaluate",
    "forge",
    "gate",
    "render_report",
    "simulate_editor",
    "text_accuracy",
    "tokenize",
    "vq_score",
    "word_accuracy",
]
