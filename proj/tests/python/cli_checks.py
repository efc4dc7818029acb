"""End-to-end checks of the homsim command-line interface.

Usage: python3 cli_checks.py /path/to/homsim [workdir]

Exercises the four subcommands against a scratch directory: determinism,
the normalization ratio, fit round-trips, file formats, and the exit-code
contract. Peak areas are recomputed here, independently of the C++ peak
analysis.
"""

import json
import math
import os
import subprocess
import sys
import tempfile

BINARY = sys.argv[1]
WORKDIR = sys.argv[2] if len(sys.argv) > 2 else tempfile.mkdtemp(prefix="homsim_cli_")
os.makedirs(WORKDIR, exist_ok=True)

PASS = 0


def run(*args, expect=0):
    result = subprocess.run([BINARY, *args], capture_output=True, text=True)
    if result.returncode != expect:
        raise AssertionError(
            f"{' '.join(args)} -> exit {result.returncode}, expected {expect}\n"
            f"stdout: {result.stdout[:2000]}\nstderr: {result.stderr[:2000]}")
    return result


def check(name, condition, detail=""):
    global PASS
    if not condition:
        raise AssertionError(f"{name}: {detail}")
    PASS += 1
    print(f"ok {name}")


def read_histogram(path):
    """Returns (centers_ns, counts) from a histogram CSV."""
    centers, counts = [], []
    with open(path) as f:
        for line in f:
            if line.startswith("#") or line.startswith("bin_start"):
                continue
            lo, hi, n = line.strip().split(",")
            centers.append(0.5 * (float(lo) + float(hi)))
            counts.append(int(n))
    return centers, counts


def peak_area(centers, counts, center_ns, window_ns=60.0):
    return sum(n for c, n in zip(centers, counts)
               if abs(c - center_ns) <= window_ns)


def main():
    out1 = os.path.join(WORKDIR, "d1")
    out2 = os.path.join(WORKDIR, "d2")

    # Determinism: identical primary outputs for a fixed seed.
    run("simulate", "--seed", "42", "--k", "0.5", "--efficiency", "0.05",
        "--n-loads", "80", "--out", out1, "--parallelism", "1")
    run("simulate", "--seed", "42", "--k", "0.5", "--efficiency", "0.05",
        "--n-loads", "80", "--out", out2, "--parallelism", "2")
    for name in ("mixer.csv", "separator.csv", "normalized.csv"):
        a = open(os.path.join(out1, name), "rb").read()
        b = open(os.path.join(out2, name), "rb").read()
        check(f"determinism {name}", a == b)
    manifest = json.load(open(os.path.join(out1, "run_manifest.json")))
    check("manifest carries seed and hash",
          manifest["seed"] == 42 and len(manifest["config_hash"]) == 16)

    # Separator-only run: zero-delay peak level with its neighbors.
    sep_dir = os.path.join(WORKDIR, "sep")
    run("simulate", "--seed", "7", "--configuration", "separator",
        "--efficiency", "0.1", "--n-loads", "300", "--out", sep_dir,
        "--parallelism", "2")
    centers, counts = read_histogram(os.path.join(sep_dir, "separator.csv"))
    zero = peak_area(centers, counts, 0.0)
    neighbors = [peak_area(centers, counts, m * 200.0)
                 for m in (-3, -2, -1, 1, 2, 3)]
    mean = sum(neighbors) / len(neighbors)
    check("separator zero peak level",
          abs(zero - mean) <= 3.5 * math.sqrt(mean),
          f"zero={zero} mean={mean}")

    # Distinguishable photons: normalized zero-delay ratio 0.5.
    both = os.path.join(WORKDIR, "k0")
    result = run("simulate", "--seed", "9", "--k", "0", "--temperature",
                 "0 uK", "--efficiency", "0.1", "--n-loads", "2000", "--out",
                 both, "--parallelism", "2")
    summary = json.loads(result.stdout)
    ratio = summary["zero_delay_ratio"]["value"]
    check("K=0 ratio near 0.5", abs(ratio - 0.5) <= 0.02, f"ratio={ratio}")

    # Round trip: simulate at (K = 0.7, T = 180 uK), then fit.
    rt = os.path.join(WORKDIR, "roundtrip")
    run("simulate", "--seed", "17", "--k", "0.7", "--temperature", "180 uK",
        "--efficiency", "0.03", "--n-loads", "1300", "--out", rt,
        "--parallelism", "2")
    fit_out = run("fit", "--mixer", os.path.join(rt, "mixer.csv"),
                  "--separator", os.path.join(rt, "separator.csv"))
    fit = json.loads(fit_out.stdout)
    check("fit recovers K", abs(fit["params"]["K"] - 0.7) <= 0.05,
          str(fit["params"]))
    check("fit recovers T", abs(fit["params"]["T_uK"] - 180.0) <= 40.0,
          str(fit["params"]))

    # Overlap command.
    identity = json.loads(run("overlap").stdout)
    check("overlap identity", abs(identity["K"] - 1.0) < 1e-9)
    offset = json.loads(run("overlap", "--offset", "90 um").stdout)
    check("overlap offset d=w", abs(offset["K"] - math.exp(-0.5)) < 1e-9)
    mismatch = json.loads(run("overlap", "--waist2", "104.4 um").stdout)
    check("overlap 16% waist mismatch", abs(mismatch["K"] - 0.97) <= 0.02)
    budget = json.loads(
        run("overlap", "--budget", "0.04", "0.04", "0.04", "0.04").stdout)
    check("overlap 4% budget", budget["K"] >= 0.8)
    run("overlap", "--tilt", "0.3", expect=2)  # non-paraxial

    # Analytic scan matches the closed curve.
    scan_dir = os.path.join(WORKDIR, "scan")
    scan = json.loads(run("scan", "--kmax", "0.78", "--out", scan_dir).stdout)
    check("scan fit exact", abs(scan["params"]["K_max"] - 0.78) < 1e-6)
    with open(os.path.join(scan_dir, "scan.csv")) as f:
        next(f)
        for line in f:
            d_um, ratio_value, _ = (float(x) for x in line.split(","))
            d = d_um * 1e-6
            expected = 0.5 * (1 - 0.78**2 * math.exp(-(d / 90e-6) ** 2))
            check(f"scan point {d_um:.0f} um",
                  abs(ratio_value - expected) <= 1e-12)

    # Exit-code contract.
    run("simulate", "--n-loads", "5", expect=2)  # seed required
    bad_cfg = os.path.join(WORKDIR, "bad.json")
    with open(bad_cfg, "w") as f:
        f.write('{"physics": {"temperature": "10 fathoms"}}')
    run("simulate", "--config", bad_cfg, "--seed", "1", expect=2)

    tiny = os.path.join(WORKDIR, "tiny.csv")
    with open(tiny, "w") as f:
        f.write("tau_ns,value,sigma\n0,0.5,0.01\n3.6,0.45,0.01\n")
    run("fit", "--normalized", tiny, expect=2)  # < 8 samples

    broken = os.path.join(WORKDIR, "broken.csv")
    with open(broken, "w") as f:
        f.write("tau_ns,value,sigma\n0,oops\n")
    result = subprocess.run([BINARY, "fit", "--normalized", broken],
                            capture_output=True, text=True)
    check("malformed CSV exit 4", result.returncode == 4, str(result))
    check("malformed CSV row diagnostic", "row 2" in result.stderr,
          result.stderr)

    # Config with units drives a run; the manifest echo re-ingests.
    cfg = os.path.join(WORKDIR, "cfg.json")
    with open(cfg, "w") as f:
        json.dump({
            "physics": {"overlap_k": 0.6, "temperature": "120 uK",
                        "emitter": {"lifetime": "26 ns"}},
            "detection": {"efficiency": 0.08, "bin_width": "1.2 ns"},
            "simulation": {"n_loads": 40, "seed": 3},
        }, f)
    cfg_dir = os.path.join(WORKDIR, "cfg_run")
    first = json.loads(run("simulate", "--config", cfg, "--out",
                           cfg_dir).stdout)
    echo = json.load(open(os.path.join(cfg_dir, "run_manifest.json")))["config"]
    cfg2 = os.path.join(WORKDIR, "cfg_echo.json")
    with open(cfg2, "w") as f:
        json.dump(echo, f)
    second = json.loads(run("simulate", "--config", cfg2, "--out",
                            os.path.join(WORKDIR, "cfg_run2")).stdout)
    check("config echo re-ingests to the same run",
          first["config_hash"] == second["config_hash"] and
          first["mixer"]["coincidences"] == second["mixer"]["coincidences"])

    print(f"{PASS} CLI checks passed")


if __name__ == "__main__":
    main()
