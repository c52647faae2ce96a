"""坐标工具

约定：x 向前、y 向左、z 向上；方位角在水平面内自 +x 逆时针为正，仰角向上为正。
四元数按 (x, y, z, w) 标量在后的顺序给出，与 scipy.spatial.transform.Rotation 一致。
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from scipy.spatial.transform import Rotation

from zerobas.core import FloatArray
from zerobas.errors import InvalidInputError

DEFAULT_EAR_OFFSET = 0.09
QUATERNION_TOLERANCE = 1e-6
_ELEVATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SphericalPosition:
    """球坐标位置

    Attributes:
        azimuth: 方位角（弧度）
        elevation: 仰角（弧度），[-π/2, π/2]
        distance: 距离（米），>= 0
    """

    azimuth: float
    elevation: float
    distance: float

    def __post_init__(self) -> None:
        for name in ("azimuth", "elevation", "distance"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite, got {getattr(self, name)}")
        if self.distance < 0:
            raise InvalidInputError(f"distance must be non-negative, got {self.distance}")
        if abs(self.elevation) > math.pi / 2 + _ELEVATION_TOLERANCE:
            raise InvalidInputError(f"elevation must lie in [-pi/2, pi/2], got {self.elevation}")

    @classmethod
    def from_degrees(cls, azimuth_deg: float, elevation_deg: float, distance: float) -> SphericalPosition:
        return cls(math.radians(azimuth_deg), math.radians(elevation_deg), distance)


def spherical_to_cartesian(s: SphericalPosition) -> FloatArray:
    """球坐标 -> 笛卡尔坐标 (x, y, z)"""
    cos_el = math.cos(s.elevation)
    return np.array(
        [
            s.distance * cos_el * math.cos(s.azimuth),
            s.distance * cos_el * math.sin(s.azimuth),
            s.distance * math.sin(s.elevation),
        ]
    )


def cartesian_to_spherical(point: npt.ArrayLike) -> SphericalPosition:
    """笛卡尔坐标 -> 球坐标；原点返回全零"""
    x, y, z = np.asarray(point, dtype=np.float64).reshape(3)
    distance = math.sqrt(x * x + y * y + z * z)
    if distance == 0:
        return SphericalPosition(0.0, 0.0, 0.0)
    return SphericalPosition(math.atan2(y, x), math.atan2(z, math.hypot(x, y)), distance)


@dataclass(frozen=True, eq=False)
class HeadPose:
    """听者头部位姿

    Attributes:
        position: 头部中心（米）
        orientation: 单位四元数 (x, y, z, w)
        ear_offset: 双耳间距的一半（米）
    """

    position: FloatArray
    orientation: FloatArray
    ear_offset: float = DEFAULT_EAR_OFFSET

    def __post_init__(self) -> None:
        position = np.array(self.position, dtype=np.float64).reshape(-1)
        orientation = np.array(self.orientation, dtype=np.float64).reshape(-1)
        if position.size != 3 or not np.all(np.isfinite(position)):
            raise InvalidInputError(f"position must be a finite 3-vector, got {self.position!r}")
        if orientation.size != 4 or not np.all(np.isfinite(orientation)):
            raise InvalidInputError(f"orientation must be a finite quaternion (x, y, z, w), got {self.orientation!r}")
        norm = float(np.linalg.norm(orientation))
        if abs(norm - 1.0) > QUATERNION_TOLERANCE:
            raise InvalidInputError(f"orientation quaternion must be unit length, got norm {norm:.9f}")
        if not self.ear_offset > 0:
            raise InvalidInputError(f"ear_offset must be positive, got {self.ear_offset}")
        position.setflags(write=False)
        orientation.setflags(write=False)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "orientation", orientation)

    @classmethod
    def identity(cls, position: npt.ArrayLike = (0.0, 0.0, 0.0), ear_offset: float = DEFAULT_EAR_OFFSET) -> HeadPose:
        return cls(np.asarray(position, dtype=np.float64), np.array([0.0, 0.0, 0.0, 1.0]), ear_offset)

    @classmethod
    def from_yaw(cls, yaw: float, position: npt.ArrayLike = (0.0, 0.0, 0.0), **kwargs) -> HeadPose:
        """绕 z 轴旋转 yaw 弧度（逆时针为正）"""
        quat = Rotation.from_euler("z", yaw).as_quat()
        return cls(np.asarray(position, dtype=np.float64), quat, **kwargs)


def ears_from_head_pose(h: HeadPose) -> tuple[FloatArray, FloatArray]:
    """由头部位姿推出双耳位置；头部坐标系中左耳在 +y"""
    rotation = Rotation.from_quat(h.orientation)
    offset = rotation.apply([0.0, h.ear_offset, 0.0])
    return h.position + offset, h.position - offset


class CoordinateFrame(StrEnum):
    """数据集标注使用的坐标轴约定"""

    X_FORWARD_Y_LEFT = "x-forward-y-left"
    Y_FORWARD_X_RIGHT = "y-forward-x-right"

    def to_canonical(self, point: npt.ArrayLike) -> FloatArray:
        """转换到 x 向前、y 向左的内部坐标系"""
        p = np.asarray(point, dtype=np.float64).reshape(3)
        if self is CoordinateFrame.X_FORWARD_Y_LEFT:
            return p.copy()
        # (右, 前, 上) -> (前, 左, 上)
        return np.array([p[1], -p[0], p[2]])

    def from_canonical(self, point: npt.ArrayLike) -> FloatArray:
        p = np.asarray(point, dtype=np.float64).reshape(3)
        if self is CoordinateFrame.X_FORWARD_Y_LEFT:
            return p.copy()
        return np.array([-p[1], p[0], p[2]])

    def to_frame(self, point: npt.ArrayLike, target: CoordinateFrame) -> FloatArray:
        """将本坐标系下的点转换到 target 坐标系"""
        return target.from_canonical(self.to_canonical(point))
