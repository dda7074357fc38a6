"""Recall@k evaluation over masked queries plus the external judge client."""

from .judge import (
    JUDGE_PROMPT_TEMPLATE,
    JudgeConfig,
    JudgeScores,
    judge,
    judge_many,
    parse_scores,
    render_prompt,
)
from .masked import MaskedQuery, last_sentence_text, make_masked_queries
from .recall import (
    PAPER_SCALE_LEGEND,
    DenseRetriever,
    LexicalRetriever,
    compare_retrievers,
    recall_at_k,
    report_to_csv,
    report_to_json,
)

__all__ = [
    "DenseRetriever",
    "JUDGE_PROMPT_TEMPLATE",
    "JudgeConfig",
    "JudgeScores",
    "LexicalRetriever",
    "MaskedQuery",
    "PAPER_SCALE_LEGEND",
    "compare_retrievers",
    "judge",
    "judge_many",
    "last_sentence_text",
    "make_masked_queries",
    "parse_scores",
    "recall_at_k",
    "render_prompt",
    "report_to_csv",
    "report_to_json",
]
