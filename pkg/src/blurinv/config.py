"""Validated session settings shared by the command-line tools."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .projectors import BlurClass

FORMATS = ("json", "csv")


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to rerun a command bit-identically.

    ``L`` of ``None`` means "half the larger input dimension"; ``canvas`` of
    ``None`` means the input size (or the power-of-two registration canvas).
    """

    blur_class: str = "centro"
    r: int = 7
    L: float | None = None
    eps: float = 1e-3
    lowpass_radius: float = 0.25
    canvas: tuple[int, int] | None = None
    seed: int = 0
    format: str = "json"

    def __post_init__(self):
        BlurClass.parse(self.blur_class)
        if not isinstance(self.r, int) or self.r < 0:
            raise ValueError(f"order r must be a nonnegative integer, got {self.r!r}")
        if self.L is not None and not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if not 0 < self.lowpass_radius <= 1.5:
            raise ValueError(f"lowpass radius must lie in (0, 1.5], got {self.lowpass_radius!r}")
        if self.canvas is not None and (len(self.canvas) != 2 or min(self.canvas) < 1):
            raise ValueError(f"bad canvas {self.canvas!r}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")

    @property
    def cls(self) -> BlurClass:
        return BlurClass.parse(self.blur_class)

    def length(self, *images) -> float:
        """``L`` or half the largest dimension among ``images``."""
        if self.L is not None:
            return float(self.L)
        return max(max(f.shape) for f in images) / 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class"] = str(self.cls)
        del d["blur_class"]
        if self.canvas is not None:
            d["canvas"] = list(self.canvas)
        return d
