"""Training and evaluation report models."""
from typing import Any

from pydantic import BaseModel, Field


class PhaseReport(BaseModel):
    """Outcome of one training phase."""

    phase: str = Field(..., description="heatmap, dims, disp or joint")
    epochs_run: int = Field(default=0, ge=0)
    loss_curve: list[float] = Field(default_factory=list, description="Mean training loss per epoch")
    stop_reason: str = Field(default="epochs", description="epochs, patience or empty")
    loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    checkpoint: str | None = Field(default=None, description="Checkpoint key written at phase end")


class TrainReport(BaseModel):
    """Outcome of a full training schedule."""

    run_id: str = ""
    seed: int = 0
    use_tmp: bool = True
    phases: list[PhaseReport] = Field(default_factory=list)
    final_checkpoint: str | None = None

    @property
    def initial_loss(self) -> float | None:
        for phase in self.phases:
            if phase.loss_curve:
                return phase.loss_curve[0]
        return None

    @property
    def final_loss(self) -> float | None:
        for phase in reversed(self.phases):
            if phase.loss_curve:
                return phase.loss_curve[-1]
        return None


class MatchedPair(BaseModel):
    """One ground truth to prediction match."""

    gt_id: int
    pred_id: int
    iou: float


class FrameDiagnostics(BaseModel):
    """Per-frame matching outcome."""

    frame: int
    num_gt: int = 0
    num_pred: int = 0
    fn: int = 0
    fp: int = 0
    idsw: int = 0
    matches: list[MatchedPair] = Field(default_factory=list)


class EvalReport(BaseModel):
    """Metric values for one sequence or an aggregate of sequences."""

    sequence: str = "aggregate"
    mota: float | None = None
    motp: float | None = None
    hota: float = 0.0
    idf1: float = 0.0
    ids: int = 0
    fn: int = 0
    fp: int = 0
    num_gt: int = 0
    num_pred: int = 0
    num_matches: int = 0
    idtp: int = 0
    num_frames: int = 0
    hota_sum: float = Field(default=0.0, description="Sum of per-frame hota_score terms")
    fps: float | None = None
    elapsed: float | None = Field(default=None, description="Seconds spent tracking, when timed")
    distance_sum: float = Field(default=0.0, description="Sum of 1 - IoU over matched pairs")
    per_frame: list[FrameDiagnostics] = Field(default_factory=list)

    def summary(self) -> dict[str, Any]:
        """Headline values without per-frame diagnostics."""
        return self.model_dump(exclude={"per_frame"})


class ComparisonReport(BaseModel):
    """Side-by-side evaluation of training or model variants."""

    study: str
    seed: int
    variants: dict[str, EvalReport] = Field(default_factory=dict)
    final_losses: dict[str, float | None] = Field(default_factory=dict)
