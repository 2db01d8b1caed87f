"""
Run configuration - everything a CLI command needs to reproduce its outputs
"""

from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from ..config import settings
from ..errors import DatasetError, InvalidInputError
from .evaluation import ScoringConfig
from .forest import TrainingConfig
from .imaging import CameraIntrinsics
from .proposals import ProposalConfig
from .trial import SynthConfig

RUN_FILE = "run.json"


def settings_intrinsics() -> CameraIntrinsics:
    """Full-resolution intrinsics from the environment"""
    return CameraIntrinsics(
        fx=settings.depth_fx,
        fy=settings.depth_fy,
        cx=settings.depth_cx,
        cy=settings.depth_cy,
    )


def settings_synth_config() -> SynthConfig:
    return SynthConfig(background_threshold=settings.background_threshold_m)


class RunConfig(BaseModel):
    """Full configuration and seed of one command invocation"""
    command: str = Field(description="CLI command that produced this run")
    rng_seed: int = Field(default=0, ge=0, description="Single seed all randomness derives from")
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)

    training: TrainingConfig = Field(default_factory=TrainingConfig)
    proposal: ProposalConfig = Field(default_factory=ProposalConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    synth: SynthConfig = Field(default_factory=settings_synth_config)
    intrinsics: CameraIntrinsics = Field(default_factory=settings_intrinsics)

    regions_path: str = Field(default_factory=lambda: settings.regions_path)
    step_ordering_path: str = Field(default_factory=lambda: settings.step_ordering_path)

    # Inputs
    train_dirs: List[str] = Field(default_factory=list, description="Training trial directories")
    holdout_dirs: List[str] = Field(default_factory=list, description="Holdout trial directories")
    model_path: Optional[str] = Field(default=None, description="Serialized forest")
    summary_path: Optional[str] = Field(default=None, description="Evaluate summary with EER thresholds")

    # Outputs
    out_path: Optional[str] = Field(default=None, description="Output directory")

    # Command specific
    template: Optional[str] = None
    count: int = Field(default=1, ge=1, description="Trials to generate")
    parameter: Optional[str] = None
    values: List[float] = Field(default_factory=list)
    max_pixels_per_image: Optional[int] = Field(default=None, ge=1)

    def check_paths(self) -> None:
        """
        Verify every referenced input exists

        Raises:
            DatasetError: a trial directory or model file is missing
        """
        for directory in [*self.train_dirs, *self.holdout_dirs]:
            if not Path(directory).is_dir():
                raise DatasetError(f"Trial directory not found: {directory}")
        for path in (self.model_path, self.summary_path):
            if path is not None and not Path(path).is_file():
                raise DatasetError(f"File not found: {path}")

    def save(self, directory: Union[str, Path]) -> Path:
        """Write ``run.json`` into ``directory``"""
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        path = target / RUN_FILE
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        """
        Read a ``run.json`` written by an earlier command

        Raises:
            InvalidInputError: the document does not validate
        """
        text = Path(path).read_text(encoding="utf-8")
        try:
            return cls.model_validate_json(text)
        except ValidationError as e:
            raise InvalidInputError(f"Invalid run config {path}: {e}") from e
