"""Reproducible experiment runner.

Subcommands
    compile    write a compiled sequence as qqft-seq/1 JSON and report depth
    verify     recompose a sequence file and check it against the DFT
    flatband   gap/width noise sweep and Bott/Chern phase diagram (CSV)
    poincare   propagator matrices, dispersion table and S_L/S_P sweep (CSV)

Every output embeds the artifact version and a digest of the run
configuration; rerunning a command with the same configuration and seed
reproduces every output byte-exactly (files carry no timestamps, and worker
counts never change numeric results).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, circuit, haldane, poincare

_DEF_FLAT_SIGMAS = "0,5e-4,1e-3,2.5e-3,5e-3"
_DEF_POINCARE_SIGMAS = "0,5e-3,2e-2"


def _config_digest(config: dict) -> str:
    text = json.dumps(config, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _write_csv(path: Path, digest: str, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# qqft/{__version__} config={digest}\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _write_manifest(outdir: Path, command: str, config: dict, outputs):
    digest = _config_digest(config)
    doc = {
        "schema": "qqft-run/1",
        "artifact_version": __version__,
        "command": command,
        "config": config,
        "config_digest": digest,
        "outputs": sorted(outputs),
    }
    path = outdir / "run_manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return digest


def _sigma_list(text: str):
    return [float(s) for s in text.split(",") if s.strip() != ""]


def _sigma_tag(sigma: float) -> str:
    return f"{sigma:g}".replace(".", "p").replace("-", "m")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------

def cmd_compile(args) -> int:
    if args.n is not None:
        if args.n < 1:
            raise SystemExit("error: --n must be >= 1")
        seq = circuit.build_radix2_qqft(args.n)
        scaling = "N log N"
        name = f"seq_radix2_n{args.n}.json"
    else:
        if args.N < 2:
            raise SystemExit("error: --N must be >= 2")
        seq = circuit.build_generic_qqft(args.N)
        scaling = "N^2"
        name = f"seq_generic_N{args.N}.json"
    config = {"command": "compile", "n": args.n, "N": args.N}
    digest = _config_digest(config)
    doc = json.loads(circuit.sequence_to_json(seq))
    doc["artifact_version"] = __version__
    doc["config_digest"] = digest
    out = _outdir(args)
    path = out / name
    path.write_text(json.dumps(doc, indent=1) + "\n")
    _write_manifest(out, "compile", config, [name])
    print(f"n_sites={seq.n_sites} depth={seq.depth} gates={len(seq.gates)} "
          f"scaling=D~{scaling}")
    print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    seq = circuit.sequence_from_json(Path(args.sequence).read_text())
    U = circuit.sequence_to_unitary(seq)
    err = circuit.dft_distance(U, seq.n_sites)
    ok = err < args.tol
    print(f"{'PASS' if ok else 'FAIL'} max|U - DFT| = {err:.3e} "
          f"(tol {args.tol:g}, N={seq.n_sites}, depth={seq.depth})")
    return 0 if ok else 1


def cmd_flatband(args) -> int:
    sigmas = _sigma_list(args.sigma)
    config = {
        "command": "flatband", "phi": args.phi, "M": args.M,
        "sigmas": sigmas, "realizations": args.realizations,
        "grid": args.grid, "seed": args.seed,
        "noise_on_diagonal": args.noise_on_diagonal,
        "phase_grid": args.phase_grid, "phase_sigma": args.phase_sigma,
        "phase_realizations": args.phase_realizations,
        "phi_range": args.phi_range, "m_range": args.m_range,
    }
    out = _outdir(args)
    digest = _config_digest(config)
    outputs = []

    params = haldane.HaldaneParams(phi=args.phi, M=args.M)
    points = haldane.noise_sweep_gap_width(
        params, sigmas, args.realizations, args.seed, grid=args.grid,
        workers=args.workers, noise_on_diagonal=args.noise_on_diagonal,
    )
    rows = [(p.sigma, p.mean_gap, p.mean_width, p.stderr_gap, p.stderr_width)
            for p in points]
    _write_csv(out / "gap_width.csv", digest,
               ["sigma", "mean_gap", "mean_width", "stderr_gap", "stderr_width"],
               rows)
    outputs.append("gap_width.csv")
    for p in points:
        print(f"sigma={p.sigma:g}: G={p.mean_gap:.6g} W={p.mean_width:.6g} "
              f"W/G={p.mean_width / p.mean_gap:.4f}")

    if args.phase_grid > 0:
        phis = np.linspace(args.phi_range[0], args.phi_range[1],
                           args.phase_grid)
        ms = np.linspace(args.m_range[0], args.m_range[1], args.phase_grid)
        cells = haldane.phase_diagram(
            phis, ms, args.phase_sigma, args.seed, grid=args.grid,
            realizations=args.phase_realizations, workers=args.workers,
        )
        _write_csv(out / "phase_diagram.csv", digest,
                   ["phi", "M", "bott", "chern"], cells)
        outputs.append("phase_diagram.csv")
        print(f"phase diagram: {len(cells)} cells at sigma={args.phase_sigma:g}")

    _write_manifest(out, "flatband", config, outputs)
    print(f"wrote {out}")
    return 0


def cmd_poincare(args) -> int:
    sigmas = _sigma_list(args.sigma)
    config = {
        "command": "poincare", "N": args.N, "gamma": args.gamma,
        "sigmas": sigmas, "realizations": args.realizations,
        "seed": args.seed, "noise_on_diagonal": args.noise_on_diagonal,
    }
    out = _outdir(args)
    digest = _config_digest(config)
    outputs = []

    disp = poincare.build_dispersion(args.N, args.gamma)
    lattice = poincare.equivalence_classes(args.N, args.gamma)
    doc = {
        "schema": "qqft-dispersion/1",
        "artifact_version": __version__,
        "config_digest": digest,
        "n_sites": disp.n_sites,
        "gamma": disp.gamma,
        "tau": disp.tau,
        "j": list(disp.j_table),
        "n_classes": len(lattice.classes),
    }
    (out / "dispersion.json").write_text(json.dumps(doc, indent=1) + "\n")
    outputs.append("dispersion.json")

    for sigma in sigmas:
        noise = (poincare.NoiseModel(sigma, args.seed, stream_id=0)
                 if sigma > 0 else None)
        g = poincare.greens_function(
            disp, noise, noise_on_diagonal=args.noise_on_diagonal).matrix
        for part, array in (("re", g.real), ("im", g.imag)):
            name = f"greens_{part}_sigma{_sigma_tag(sigma)}.csv"
            # rows are the site offset n, columns the stroboscopic time m
            _write_csv(out / name, digest,
                       [f"m{m}" for m in range(args.N)], array.tolist())
            outputs.append(name)

    points = poincare.noise_sweep_symmetry(
        args.N, args.gamma, sigmas, args.realizations, args.seed,
        workers=args.workers,
    )
    rows = [(p.sigma, p.mean_sl, p.stderr_sl, p.mean_sp, p.stderr_sp)
            for p in points]
    _write_csv(out / "symmetry.csv", digest,
               ["sigma", "mean_SL", "stderr_SL", "mean_SP", "stderr_SP"], rows)
    outputs.append("symmetry.csv")
    for p in points:
        print(f"sigma={p.sigma:g}: S_L={p.mean_sl:.6g} S_P={p.mean_sp:.6g}")

    _write_manifest(out, "poincare", config, outputs)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qqft",
        description="Nearest-neighbor Fourier compiler and Hamiltonian-"
                    "engineering experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("compile", help="compile a Fourier sequence")
    size = pc.add_mutually_exclusive_group(required=True)
    size.add_argument("--n", type=int, help="radix-2 size exponent, N = 2^n")
    size.add_argument("--N", type=int, help="arbitrary size (Givens route)")
    pc.add_argument("--out", default=".", help="output directory")
    pc.set_defaults(func=cmd_compile)

    pv = sub.add_parser("verify", help="check a sequence file against the DFT")
    pv.add_argument("sequence", help="qqft-seq/1 JSON file")
    pv.add_argument("--tol", type=float, default=1e-10)
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("flatband", help="flat Chern band experiment")
    pf.add_argument("--phi", type=float, default=-np.pi / 2)
    pf.add_argument("--M", type=float, default=0.0)
    pf.add_argument("--sigma", default=_DEF_FLAT_SIGMAS,
                    help="comma-separated noise strengths")
    pf.add_argument("--realizations", type=int, default=100)
    pf.add_argument("--grid", type=int, default=16,
                    help="Brillouin-zone grid size per dimension")
    pf.add_argument("--phase-grid", type=int, default=32,
                    help="phase-diagram cells per axis (0 skips the diagram)")
    pf.add_argument("--phase-sigma", type=float, default=3e-2)
    pf.add_argument("--phase-realizations", type=int, default=1)
    pf.add_argument("--phi-range", type=float, nargs=2,
                    default=(-np.pi, np.pi))
    pf.add_argument("--m-range", type=float, nargs=2, default=(-6.0, 6.0))
    pf.set_defaults(func=cmd_flatband)

    pp = sub.add_parser("poincare", help="spacetime-crystal experiment")
    pp.add_argument("--N", type=int, default=33)
    pp.add_argument("--gamma", type=int, default=2)
    pp.add_argument("--sigma", default=_DEF_POINCARE_SIGMAS,
                    help="comma-separated noise strengths")
    pp.add_argument("--realizations", type=int, default=100)
    pp.set_defaults(func=cmd_poincare)

    for p in (pf, pp):
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", default="qqft-out")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel realizations; never changes results")
        p.add_argument("--noise-on-diagonal", action="store_true",
                       help="also apply one noise draw to the diagonal step")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
