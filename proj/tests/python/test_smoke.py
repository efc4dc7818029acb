"""Smoke tests for the Python bindings.

Runs as a plain script (no pytest dependency): every check is an assert and
the process exits nonzero on the first failure.
"""

import math
import sys

import homsim


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def test_peak_ratio():
    assert close(homsim.peak_ratio(0.0), 0.5)
    assert close(homsim.peak_ratio(1.0), 0.0)
    assert close(homsim.peak_ratio(0.78), 0.1958, 1e-12)


def test_wavepacket_and_densities():
    wp = homsim.PhotonWavepacket()
    assert close(abs(homsim.wavepacket_amplitude(wp, 26e-9)) ** 2,
                 math.exp(-1.0), 1e-12)
    assert homsim.wavepacket_amplitude(wp, -1e-12) == 0

    gamma = 1.0 / 26e-9
    closed = homsim.coincidence_density_closed(
        13e-9, 0.7, 2 * math.pi * 2e6, gamma)
    a = homsim.PhotonWavepacket(gamma, 0.0, 0.0)
    b = homsim.PhotonWavepacket(gamma, -2 * math.pi * 2e6, 0.0)
    numeric = homsim.coincidence_density_integral(a, b, 0.7, 13e-9)
    assert close(numeric, closed, 1e-6)


def test_broadening():
    # Perfect spatial overlap always dips to zero at zero delay.
    for t in (0.0, 100e-6, 200e-6):
        assert homsim.broadened_signal(0.0, 1.0, t) == 0.0
    tau_star = 2 * homsim.HBAR / (homsim.K_BOLTZMANN * 180e-6)
    assert close(homsim.averaged_interference_factor(tau_star, 180e-6),
                 0.125, 1e-12)


def test_overlap():
    m1 = homsim.GaussianMode()
    assert close(homsim.overlap(m1, m1), 1.0, 1e-12)
    m2 = homsim.GaussianMode(focus=[90e-6, 0.0, 0.0])
    assert close(homsim.overlap(m1, m2), math.exp(-0.5), 1e-9)
    mismatched = homsim.GaussianMode(waist=90e-6 * 1.16)
    assert abs(homsim.overlap(m1, mismatched) - 0.97) <= 0.02

    budget = homsim.alignment_budget(
        m1, [(homsim.AlignmentKind.WAIST_MISMATCH, 0.04),
             (homsim.AlignmentKind.TRANSVERSE_OFFSET, 0.04),
             (homsim.AlignmentKind.FOCAL_SHIFT, 0.04),
             (homsim.AlignmentKind.AXIS_TILT, 0.04)])
    assert budget["exact"] >= 0.8


def test_trap():
    trap = homsim.TrapConfig()
    assert close(homsim.lightshift([0.0, 0.0, 0.0], trap), trap.depth, 1e-30)
    emitter = homsim.EmitterConstants()
    assert abs(trap.radial_frequency(emitter.mass) - 120e3) < 2e3


def test_experiment_roundtrip():
    seq = homsim.SequenceConfig()
    det = homsim.DetectionConfig()
    det.efficiency = 0.1
    det.background_rate = 0.0
    physics = homsim.PhysicsModel()
    physics.overlap_k = 0.0
    physics.temperature = 0.0

    det.configuration = homsim.BeamConfiguration.MIXER
    mixer = homsim.run_experiment(seq, det, physics, 150, 5, 2)
    again = homsim.run_experiment(seq, det, physics, 150, 5, 1)
    assert mixer.counts == again.counts  # fixed seed, any parallelism

    det.configuration = homsim.BeamConfiguration.SEPARATOR
    separator = homsim.run_experiment(seq, det, physics, 150, 6, 2)
    value, sigma = homsim.peak_ratio_estimate(mixer, separator)
    assert 0.4 < value < 0.6
    assert mixer.tallies.zero_window_pairs > 1000

    signal = homsim.normalize(homsim.rebin(mixer, 3),
                              homsim.rebin(separator, 3))
    assert len(signal.tau) == len(signal.value)


def test_fit_recovery():
    gamma = 1.0 / 26e-9
    tau = [t * 3.6e-9 for t in range(-28, 29)]
    value = [0.5 * homsim.broadened_signal(t, 0.7, 180e-6) for t in tau]
    sigma = [0.01] * len(tau)
    fit = homsim.fit_zero_peak(tau, value, sigma)
    assert fit["converged"]
    assert abs(fit["params"]["K"] - 0.7) < 1e-5
    assert abs(fit["params"]["T"] - 180e-6) < 1e-8

    d = [i * 30e-6 for i in range(9)]
    ratio = [homsim.scan_ratio(0.78, 90e-6, 0.0, x) for x in d]
    scan_fit = homsim.fit_displacement_scan(ratio=ratio, displacement=d,
                                            sigma=[0.01] * len(d),
                                            waist=90e-6)
    assert abs(scan_fit["params"]["K_max"] - 0.78) < 1e-5


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
