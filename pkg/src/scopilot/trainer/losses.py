"""The two training objectives.

Next-token loss is masked mean cross-entropy: positions whose mask bit is 0
(injected reference spans, cite-key tokens) condition the model but are never
predicted. The retrieval loss scores a query against its positive and the
negative pool by cosine similarity over a temperature, as softmax
cross-entropy with the positive in slot 0.
"""

from __future__ import annotations

from ..errors import ContractError, DegenerateBatchError
from ..nncore import tensor as T


def ntp_loss(logits: T.Tensor, targets, mask) -> tuple[T.Tensor, int]:
    """Mean cross-entropy over positions with mask = 1.

    Returns (scalar loss tensor, number of counted positions).
    """
    total, count = T.masked_cross_entropy_sum(logits, targets, mask)
    if count == 0:
        raise DegenerateBatchError("next-token loss over an all-zero mask")
    return T.scale(total, 1.0 / count), count


def contrastive_loss(q: T.Tensor, pos: T.Tensor, negs: list[T.Tensor], tau: float = 1.0) -> T.Tensor:
    """-log of the positive's share of similarity mass at temperature tau.

    All vectors are expected unit-norm so the dot products are cosines.
    An empty negative pool gives exactly 0 with zero gradient: the positive
    holds all the mass already.
    """
    if tau <= 0:
        raise ContractError(f"temperature must be positive, got {tau}")
    d = q.shape[-1]
    for vec in [pos, *negs]:
        if vec.shape[-1] != d:
            raise ContractError(
                f"embedding dimension mismatch: query {d} vs candidate {vec.shape[-1]}"
            )
    if not negs:
        return T.constant(0.0, dtype=q.dtype)
    rows = T.stack_rows([pos, *negs])
    sims = T.reshape(T.matmul(rows, T.reshape(q, (d, 1))), (-1,))
    return T.softmax_cross_entropy(T.scale(sims, 1.0 / tau), 0)
