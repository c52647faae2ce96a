"""ZeroBAS - 零样本单声道到双耳语音合成"""

__version__ = "0.1.0"

# 导出核心类型与配置
from .config import Config
from .core import PipelineConfig, PoseTrack, SampleTrajectory, Waveform

__all__ = ["Config", "PipelineConfig", "PoseTrack", "SampleTrajectory", "Waveform", "__version__"]
