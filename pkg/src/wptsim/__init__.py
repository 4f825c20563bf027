"""Initial-access wireless power transfer simulator and trace-replay analyzer.

Compares adaptive single-tone and multi-tone excitation from a large
distributed array: received envelope synthesis, a nonlinear harvester, the
energy-neutral device's buffer dynamics and Monte-Carlo response times.
"""
from ._kernels import USE_NUMBA
from .array_channel import (ArrayGeometry, ChannelRealization, FadingConfig, ceiling_grid,
                            free_space_gain, sample_channel)
from .campaign import (CampaignConfig, SweepReport, SweepRow, emit_report, load_config,
                       parse_report, run_point, run_sweep)
from .end_device import (IDEAL_MCU, REALISTIC_MCU, BufferState, DeviceEvents, EndDeviceConfig,
                         McuLoadCurve, mcu_power, pilot_energy, simulate_device, size_buffer,
                         step_buffer)
from .errors import ConfigError, DataError, OutOfRangeError, TraceParseError, WptError
from .excitation import (ExcitationPlan, PowerEnvelope, adaptive_single_tone_plan,
                         multi_tone_plan, synthesize_envelope)
from .harvester import (MULTI_TONE_CURVE, SINGLE_TONE_CURVE, EfficiencyCurve, HarvesterModel,
                        HarvestTrace, ParametricNonlinearity, harvest_envelope, harvester_voltage,
                        rf_to_dc)
from .quantities import (DEFAULT_CALIBRATION, GainCalibration, PowerQuantity, VoltageQuantity,
                         combine_equal_sources, dbm_to_watt, gain_to_power, watt_to_dbm)
from .trace_replay import (EpTrace, ResponseStats, cdf_points, monte_carlo_response,
                           parse_ep_trace, reconstruct_buffer)

__version__ = "0.1.0"
