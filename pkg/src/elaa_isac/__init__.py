"""
Near-field channel, waveform and detection toolkit for ISAC with extremely
large aperture arrays.
"""

from .analytics import correlation_range_sweep, normalized_array_gain, steering_correlation
from .errors import ElaaIsacError
from .geometry import (
    ArrayGeometry,
    build_upa,
    build_upa_fixed_aperture,
    fraunhofer_distance,
    fraunhofer_element_formula,
    wavelength_of,
)
from .propagation import (
    AmplitudeModel,
    ChannelModel,
    ChannelSet,
    SourcePoint,
    build_channels,
    far_field_steering,
    near_field_steering,
)
from .rcs import DiskTarget, far_field_rcs_disk, near_field_rcs_disk
from .sensing import (
    EchoModel,
    MatchedSubspaceDetector,
    PdEstimate,
    Scatterer,
    ScattererSet,
    SensingScenario,
    calibrate_threshold,
    estimate_pd,
)
from .waveform import (
    IsacWaveform,
    RateReport,
    achievable_rates,
    design_weighted_waveform,
    estimate_channels_ls,
    mrt_waveform,
    project_null_constraints,
    reference_radar_waveform,
)

__version__ = "0.1.0"
