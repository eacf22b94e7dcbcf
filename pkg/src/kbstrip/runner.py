"""Experiment dispatch: one validated spec in, artifact files and an exit
status out.

Exit statuses: 0 pass, 1 property failure, 2 configuration error, 3
numerical blow-up.  Every run writes a ledger CSV (when a time integration
happened), a report JSON, and a manifest JSON; the manifest is the only
artifact whose bytes may differ between identical runs (it carries wall
time).
"""

from __future__ import annotations

import dataclasses
import os
import time

import numpy as np

from .config import ExperimentSpec, GaussianSine, build_initial, serialize
from .decay import (
    continuous_dependence_experiment,
    decay_parameters,
    envelope_check,
    gradient_decay_check,
)
from .energy import WeightParams, identity_residual, inequality_suite, sharp_energy_check
from .errors import BlowUpError, KbstripError
from .galerkin import convergence_study, decaying_gaussian_target, manufactured_run
from .io import emit_ledger, ensure_dir, write_manifest, write_report
from .timestepping import integrate

EXIT_PASS = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_BLOW_UP = 3

IDENTITY_PASS_LEVEL = 1e-8
DEFAULT_PROBES = tuple(
    (d, d1) for d in (0.1, 1.0, 10.0) for d1 in (0.1, 1.0, 10.0)
)


def _weight_for(spec: ExperimentSpec) -> WeightParams:
    if spec.decay_b_from_width:
        return WeightParams(b=decay_parameters(spec.geometry.B).b0)
    return spec.weight


def _perturbation_field(spec: ExperimentSpec, u0):
    """Perturbation direction for the continuous-dependence experiment.

    For Gaussian data, the same envelope on the next transverse mode (an
    independent direction); otherwise the data shifted one grid cell in x.
    """
    ic = spec.initial_condition
    g = spec.geometry
    if isinstance(ic, GaussianSine) and ic.y_mode < g.Ny:
        pert_spec = dataclasses.replace(
            spec,
            initial_condition=dataclasses.replace(ic, y_mode=ic.y_mode + 1),
            ic_scale_to_norm=None,
        )
        return build_initial(pert_spec)
    shift = np.exp(-1j * g.wavenumbers() * g.dx)[:, None]
    return u0.with_coeffs(u0.coeffs * shift - u0.coeffs)


def run_experiment(spec: ExperimentSpec, out_dir: str | None = None,
                   quiet: bool = False) -> int:
    """Execute one experiment, writing artifacts into its output directory."""
    out = ensure_dir(out_dir if out_dir is not None else spec.output_dir)
    t_start = time.perf_counter()
    report = {"name": spec.name, "experiment": spec.experiment, "failed": False}
    status = EXIT_PASS
    ledger = None

    def say(msg):
        if not quiet:
            print(msg)

    try:
        u0 = build_initial(spec)
        b = _weight_for(spec)

        if spec.experiment == "evolve":
            ledger = integrate(
                u0, spec.sim, b=b,
                with_residuals=spec.with_residuals,
                store_states_every=spec.store_states_every,
            )
            report["sharp_energy_drift"] = sharp_energy_check(ledger)
            report["final_l2_sq"] = ledger.l2_sq[-1]
            report["buffer_flagged"] = ledger.buffer_flagged

        elif spec.experiment == "decay_cert":
            cert = decay_parameters(spec.geometry.B)
            ledger = integrate(u0, spec.sim, b=b, decay_reference=cert)
            done = envelope_check(ledger, cert)
            c_fit, grad_ok = gradient_decay_check(ledger, cert)
            report["certificate"] = done
            report["gradient_C_fit"] = c_fit
            report["gradient_passed"] = grad_ok
            report["buffer_flagged"] = ledger.buffer_flagged
            if not (done.passed and grad_ok):
                status = EXIT_PROPERTY_FAILURE

        elif spec.experiment == "identity_suite":
            residuals = {
                ident: identity_residual(u0, b, ident).relative()
                for ident in ("E2", "E3", "E4", "ELEV")
            }
            report["identity_residuals"] = residuals
            report["inequalities"] = inequality_suite(u0, b, DEFAULT_PROBES)
            ineq = report["inequalities"]
            margins_ok = (
                ineq["steklov"]["margin"] >= -1e-12 * max(ineq["steklov"]["rhs"], 1.0)
                and ineq["l4_interpolation"]["margin"] >= -1e-12
                and all(c["margin"] >= 0.0 for c in ineq["weighted_sup"])
            )
            if not margins_ok or any(
                r > IDENTITY_PASS_LEVEL for r in residuals.values()
            ):
                status = EXIT_PROPERTY_FAILURE

        elif spec.experiment == "convergence":
            study = convergence_study(u0, spec.sim, spec.mode_counts)
            report["convergence"] = study
            if study.errors and any(
                e1 > e0 for e0, e1 in zip(study.errors, study.errors[1:])
            ):
                status = EXIT_PROPERTY_FAILURE

        elif spec.experiment == "continuous_dependence":
            pert = _perturbation_field(spec, u0)
            result = continuous_dependence_experiment(
                u0, pert, spec.scales, spec.sim, b,
                nonlinearity_on=spec.sim.nonlinearity_on,
            )
            report["continuous_dependence"] = result
            if not result["passed"]:
                status = EXIT_PROPERTY_FAILURE

        elif spec.experiment == "manufactured":
            result = manufactured_run(
                spec.sim, decaying_gaussian_target(spec.geometry), spec.geometry
            )
            report["manufactured"] = result
            if abs(result["order"] - 4.0) > 0.3 and not (
                result["order"] == 0.0 and result["clean"]
            ):
                status = EXIT_PROPERTY_FAILURE

        else:
            raise KbstripError(f"unhandled experiment {spec.experiment!r}")

    except BlowUpError as err:
        report["failed"] = True
        report["blow_up_time"] = err.t
        ledger = err.ledger
        status = EXIT_BLOW_UP
        say(f"blow-up at t = {err.t:g}")

    if ledger is not None:
        emit_ledger(ledger, os.path.join(out, "ledger.csv"))
    report["exit_status"] = status
    write_report(report, os.path.join(out, "report.json"))
    write_manifest(
        os.path.join(out, "manifest.json"),
        serialize(spec),
        wall_time=time.perf_counter() - t_start,
        extra={"exit_status": status},
    )
    say(f"{spec.name}: {'pass' if status == EXIT_PASS else f'exit {status}'}"
        f" ({out})")
    return status
