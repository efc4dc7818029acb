"""Two-photon coincidence simulator for independently trapped atoms.

Thin Python layer over the C++ core: temporal wavepackets and the beam
splitter coincidence density, Gaussian mode overlaps, dipole-trap recoil
heating, the event-level start-stop histogram simulator, and the (K, T)
and displacement-scan fits.
"""

from _homsim import (  # noqa: F401
    HBAR,
    K_BOLTZMANN,
    NATURAL_DECAY_RATE,
    AlignmentKind,
    BeamConfiguration,
    CoincidenceHistogram,
    DetectionConfig,
    EmitterConstants,
    ExperimentTallies,
    GaussianMode,
    NormalizedSignal,
    PhotonWavepacket,
    PhysicsModel,
    SequenceConfig,
    TrapConfig,
    alignment_budget,
    averaged_interference_factor,
    broadened_signal,
    coincidence_density_closed,
    coincidence_density_integral,
    displacement_scan,
    extract_zero_peak,
    fit_displacement_scan,
    fit_zero_peak,
    lightshift,
    lightshift_distribution,
    normalize,
    overlap,
    peak_ratio,
    peak_ratio_estimate,
    rebin,
    run_experiment,
    scan_ratio,
    wavepacket_amplitude,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
