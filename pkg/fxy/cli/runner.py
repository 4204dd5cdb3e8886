"""Dispatch a parsed experiment config to its protocol and write the result bundle."""

from __future__ import annotations

import time
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from timer import Timer

from fxy.cli.bundle import BundleWriter, ResultBundle
from fxy.cli.config import ExperimentConfig
from fxy.device import DeviceSpec, load_device, strength_curve
from fxy.dynamics import (
    DecoherenceModel,
    TimeDependentHamiltonian,
    Trajectory,
    evolve,
    sample_grid,
)
from fxy.effective import ChainConfig, effective_chain_hamiltonian
from fxy.experiments.calibration import (
    LoopPhaseProbe,
    calibrate_loop_phases,
    verify_calibration,
)
from fxy.experiments.dpt import run_dpt_sweep
from fxy.experiments.gates import prepare_entangled_state
from fxy.experiments.interference import initial_loop_state, run_ab_interference
from fxy.experiments.readout import ReadoutModel
from fxy.experiments.sideband import (
    TARGET_LABEL,
    compare_full_vs_effective,
    run_sideband_rabi,
)
from fxy.misc.funcs import get_incremental_path
from fxy.qop import site_operator

RUNS_DIR = Path("runs")


def output_dir(config: ExperimentConfig, output: Union[str, Path, None] = None) -> Path:
    """`output` if given, then the config's own, else a fresh `runs/<protocol>_NN`."""
    if output is not None:
        return Path(output)
    if config.output is not None:
        return config.output
    return get_incremental_path(RUNS_DIR / config.protocol)


def population_frame(traj: Trajectory, readout: Optional[ReadoutModel] = None) -> pd.DataFrame:
    labels = traj.qubit_labels()
    pops = traj.populations(labels)
    probs = np.stack([pops[k] for k in labels], axis=-1)
    if readout is not None:
        probs = readout.apply(probs)
    return pd.DataFrame(
        {"time_ns": traj.times, **{f"p_{k}": probs[:, i] for i, k in enumerate(labels)}}
    )


def expectation_frame(traj: Trajectory) -> pd.DataFrame:
    """⟨σˣ⟩ and ⟨σᶻ⟩ of every qubit over time; qubits are numbered from 0."""
    frame = {"time_ns": traj.times}
    for label in ("x", "z"):
        for k, site in enumerate(traj.qubit_sites):
            op = site_operator(label, site, traj.space).data
            if traj.kind == "pure":
                values = np.einsum("ti,ij,tj->t", traj.states.conj(), op, traj.states)
            else:
                values = np.einsum("tij,ji->t", traj.states, op)
            frame[f"s{label}_{k}"] = values.real
    return pd.DataFrame(frame)


def _readout(config: ExperimentConfig, device: DeviceSpec, first_qubit: int, n_qubits: int):
    if not config.mode.readout:
        return None
    return ReadoutModel.from_device(device, first_qubit=first_qubit, n_qubits=n_qubits)


def _decoherence(
    config: ExperimentConfig, device: DeviceSpec, first_qubit: int, n_qubits: int
) -> Optional[DecoherenceModel]:
    if config.mode.noise != "noisy":
        return None
    return DecoherenceModel.from_device(device, first_qubit=first_qubit, n_qubits=n_qubits)


def run_sideband_rabi_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    decoherence = _decoherence(config, device, p["bond"], 2)
    readout = _readout(config, device, p["bond"], 2)
    if config.mode.model == "full" and p["g_mhz"] > 0:
        cmp = compare_full_vs_effective(
            device,
            p["bond"],
            p["kind"],
            p["g_mhz"],
            p["duration_ns"],
            p["n_points"],
            p["ramp_ns"],
            frequency=p["frequency_ghz"],
            levels=p["levels"],
            decoherence=decoherence,
        )
        frame = population_frame(cmp.full, readout)
        frame["coupler_excitation"] = cmp.full.coupler_excitation()
        writer.write_table("trajectory.csv", frame)
        label = TARGET_LABEL[p["kind"]]
        writer.write_table(
            "comparison.csv",
            pd.DataFrame(
                {
                    "time_ns": cmp.full.times,
                    f"p_{label}_full": cmp.full.populations([label])[label],
                    f"p_{label}_effective": cmp.effective.populations([label])[label],
                }
            ),
        )
        writer.write_json(
            "comparison.json",
            {
                "max_deviation": cmp.max_deviation,
                "frequency_full_mhz": cmp.frequency_full,
                "frequency_effective_mhz": cmp.frequency_effective,
            },
        )
    else:
        traj = run_sideband_rabi(
            device,
            p["bond"],
            p["kind"],
            p["g_mhz"],
            p["duration_ns"],
            config.mode.model,
            p["n_points"],
            p["ramp_ns"],
            p["frequency_ghz"],
            p["levels"],
            decoherence=decoherence,
        )
        writer.write_table("trajectory.csv", population_frame(traj, readout))

    if p["strength_curve_amplitudes"] is not None:
        amplitudes = np.asarray(p["strength_curve_amplitudes"], dtype=float)
        writer.write_table(
            "strength_curve.csv",
            pd.DataFrame(
                {
                    "amplitude_phi0": amplitudes,
                    "g_blue_mhz": strength_curve("blue", amplitudes, device, p["bond"]),
                    "g_red_mhz": strength_curve("red", amplitudes, device, p["bond"]),
                }
            ),
        )


def run_custom_evolution_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    chain = ChainConfig.from_dict(p["chain"])
    initial = initial_loop_state(p["initial"])
    if initial.space.site_dims != chain.space.site_dims:
        raise ValueError(
            f"initial state `{p['initial']}` does not fit a {chain.n_qubits}-qubit chain"
        )

    h = TimeDependentHamiltonian.constant(effective_chain_hamiltonian(chain))
    span, every = sample_grid(p["duration_ns"], p["n_points"])
    decoherence = _decoherence(config, device, 0, chain.n_qubits)
    traj = evolve(h, initial, span, decoherence, sample_every=every)
    readout = _readout(config, device, 0, chain.n_qubits)
    writer.write_table("trajectory.csv", population_frame(traj, readout))
    writer.write_table("expectations.csv", expectation_frame(traj))


def run_ab_interference_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    chain = ChainConfig.from_dict(p["chain"])
    imap = run_ab_interference(
        chain,
        config.sweep,
        p["duration_ns"],
        initial=p["initial"],
        n_points=p["n_points"],
        allow_unequal=p["allow_unequal"],
        n_threads=n_threads,
        decoherence=_decoherence(config, device, 0, chain.n_qubits),
    )
    writer.write_table("interference.csv", imap.to_dataframe())


def run_entangled_prep_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    report = prepare_entangled_state(
        3,
        config.mode.noise,
        device,
        x_duration=p["x_duration_ns"],
        g=p["g_mhz"],
        first_qubit=p["first_qubit"],
    )
    writer.write_table("prep.csv", pd.DataFrame([report.to_dict()]))

    probs = report.state.probabilities()
    frame = pd.DataFrame({"state": report.state.space.labels(), "population": probs})
    readout = _readout(config, device, p["first_qubit"], 3)
    if readout is not None:
        frame["population_readout"] = readout.apply(probs)
    writer.write_table("populations.csv", frame)


def run_calibrate_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    n_bonds = p["n_qubits"] - 1
    if p["offsets_blue"] is None and p["offsets_red"] is None:
        probe = LoopPhaseProbe.random(n_bonds, seed=config.seed)
    else:
        probe = LoopPhaseProbe(
            p["offsets_blue"] or [0.0] * n_bonds, p["offsets_red"] or [0.0] * n_bonds
        )
    if probe.n_bonds != n_bonds:
        raise ValueError(f"expected {n_bonds} phase offsets per color, got {probe.n_bonds}")

    settings = ChainConfig.uniform(p["n_qubits"], p["g_mhz"])
    result = verify_calibration(probe, calibrate_loop_phases(probe, settings, p["n_phases"]))
    writer.write_table("calibrate.csv", result.to_dataframe())
    writer.write_json("calibrated_chain.json", result.settings.to_dict())
    logger.info(
        "calibration: max residual loop flux {:.2e} rad after {} measurements",
        max(abs(x) for x in result.residual_flux),
        probe.n_measurements,
    )


def bz_grid(value: Union[list, dict]) -> np.ndarray:
    if isinstance(value, dict):
        return np.linspace(value["start"], value["stop"], int(value["num"]))
    return np.asarray(value, dtype=float)


def run_dpt_sweep_protocol(
    config: ExperimentConfig, device: DeviceSpec, writer: BundleWriter, n_threads: int
):
    p = config.params
    sizes = p["n"] if isinstance(p["n"], list) else [p["n"]]
    grid = bz_grid(p["bz_over_j"])
    first_min = []
    for n in sizes:
        result = run_dpt_sweep(
            n,
            grid,
            j=p["j_mhz"],
            horizon=p["horizon_ns"],
            sample_every=p["sample_every_ns"],
            mode=config.mode.noise,
            device=device,
            readout=config.mode.readout,
            model=p["model"],
            n_threads=n_threads,
        )
        writer.write_table(f"dpt_n{n}.csv", result.to_dataframe())
        writer.write_table(f"loschmidt_n{n}.csv", result.loschmidt_frame())
        writer.write_table(f"rate_n{n}.csv", result.rate_frame())
        first_min.append(
            pd.DataFrame(
                {"bz_over_j": result.bz_over_j, "n": n, "first_min": result.first_min}
            )
        )
    writer.write_table("first_min.csv", pd.concat(first_min, ignore_index=True))


PROTOCOLS: dict[str, Callable[[ExperimentConfig, DeviceSpec, BundleWriter, int], None]] = {
    "sideband_rabi": run_sideband_rabi_protocol,
    "custom_evolution": run_custom_evolution_protocol,
    "ab_interference": run_ab_interference_protocol,
    "entangled_prep": run_entangled_prep_protocol,
    "calibrate": run_calibrate_protocol,
    "dpt_sweep": run_dpt_sweep_protocol,
}


def run(
    config: ExperimentConfig,
    output: Union[str, Path, None] = None,
    n_threads: int = 1,
    seed: Optional[int] = None,
) -> ResultBundle:
    """Run the config's protocol and write its CSV tables and manifest to the output directory."""
    config = config.with_overrides(seed=seed)
    outdir = output_dir(config, output)
    device = load_device(config.device_file)
    writer = BundleWriter(outdir, config)

    logger.info("running {} into {}", config.protocol, outdir)
    start = time.perf_counter()
    with Timer.get_instance().watch_and_report(f"protocol {config.protocol}"):
        PROTOCOLS[config.protocol](config, device, writer, n_threads)
    return writer.finish(time.perf_counter() - start)
