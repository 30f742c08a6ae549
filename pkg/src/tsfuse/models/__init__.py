from .bitemporal import Backbone, BackboneConfig, ChangeHead, SegHead
from .fusion import Fusion, FusionConfig
from .network import (ChangeSegNet, ModelOutputs, NetworkConfig, build_network,
                      desk_config, feature_size_for, paper_scale_config)
from .temporal import SeriesHead, TemporalEncoder, TemporalEncoderConfig, month_embedding

__all__ = [
    "Backbone", "BackboneConfig", "ChangeHead", "ChangeSegNet", "Fusion", "FusionConfig",
    "ModelOutputs", "NetworkConfig", "SegHead", "SeriesHead", "TemporalEncoder",
    "TemporalEncoderConfig", "build_network", "desk_config", "feature_size_for",
    "month_embedding", "paper_scale_config",
]
