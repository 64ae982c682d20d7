"""Break adjudication and fix validation."""

from .adjudicate import (  # noqa: F401
    AdjudicationResult,
    BreakSubmission,
    JudgeContext,
    adjudicate,
    adjudicate_correctness,
    adjudicate_crash,
)
from .fixes import Fix, FixDecision, validate_fix  # noqa: F401
