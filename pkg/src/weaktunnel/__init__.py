"""Weak measurements on tunneling wave packets.

Subpackages cover the pieces of the pipeline: spatial grids and spin algebra
(core), stationary barrier scattering (scatter), time-dependent propagation
(tdse), two-time conditional values (weakval), Gaussian detector algebra
(pointer), the particle-like null model and its statistical test (corpuscle),
and the command line (cli).
"""

from .core import (
    BarrierSpec,
    Grid,
    RegionProjector,
    WaveFunction,
    cell_projectors,
    edge_probability,
    gaussian_packet,
    region_projector,
    spin_eigenstate,
    spin_ops,
)
from .errors import (
    ConfigError,
    DerivativeError,
    EdgeDensityError,
    NumericalGuardError,
    OverlapFloorError,
    QuadratureError,
    SchemeInstabilityError,
    WeakTunnelError,
)
from .scatter import ScatterResult, delay_vs_width, group_delay, scattering_amplitudes
from .config import (
    DEFAULT_SCENARIO,
    TRANSMISSION_TRACE_SCENARIO,
    ScenarioConfig,
    load_config,
)
from .tdse import PropagatorConfig, Snapshot, energy_expectation, propagate, propagate_backward
from .weakval import (
    BarrierOccupation,
    ConditionalDistribution,
    PrePostPair,
    barrier_occupation,
    conditional_distribution,
    conditional_dwell_time,
    make_pair,
    transmitted_pair,
    weak_moment,
    weak_value,
)
from .pointer import (
    JointPointerState,
    PointerState,
    TwoProbeRun,
    WeakProbe,
    certain_shift_state,
    difference_variance,
    erase_and_postselect,
    pointer_overlap,
    shift_pointer,
    two_probe_run,
    which_path_state,
)
from .corpuscle import (
    CorpuscularModel,
    EnsembleStats,
    corpuscular_min_variance,
    corpuscularity_test,
    population_difference_variance,
    simulate_corpuscular,
)

__version__ = "0.1.0"
