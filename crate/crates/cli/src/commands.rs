use anyhow::Context;
use coupled_bec::dynamics::{autocorrelation_n, phi_current_trace, time_grid};
use coupled_bec::equilibrium::phase_diagram_sweep;
use coupled_bec::fluctuations::{
    condensate_current_phase_distance, current_zero_mode_distance, relative_pair_report,
    relative_phase_report, total_pair_report,
};
use coupled_bec::lattice::{convergence_report, LatticeQuantity};
use coupled_bec::model::BranchPoint;
use coupled_bec::{solve_equilibrium, Beta, Momentum};
use serde_json::json;

use crate::config::{Command, RunConfig, UsageError};
use crate::output::{Cell, Table};

fn beta_cell(b: Beta) -> Cell {
    match b {
        Beta::Finite(v) => Cell::Num(v),
        Beta::Infinite => Cell::Text("inf".into()),
    }
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<Table> {
    match cfg.command {
        Command::PhaseDiagram => phase_diagram(cfg),
        Command::Occupations => occupations(cfg),
        Command::Fluctuations => fluctuations(cfg),
        Command::Dynamics => dynamics(cfg),
        Command::Converge => converge(cfg),
    }
}

fn phase_diagram(cfg: &RunConfig) -> anyhow::Result<Table> {
    let mut table = Table::new(&["rho", "beta", "mu", "delta", "rho0", "rho_c", "condensed"]);
    let points = match cfg.sweep {
        Some(s) => phase_diagram_sweep(&cfg.params, s.core_axis(), &s.grid())
            .context("phase-diagram sweep")?,
        None => {
            let solution = solve_equilibrium(&cfg.params).context("equilibrium")?;
            vec![coupled_bec::equilibrium::SweepPoint {
                rho: cfg.params.rho(),
                beta: cfg.params.beta(),
                solution,
            }]
        }
    };
    for p in points {
        let s = p.solution;
        table.push(vec![
            p.rho.into(),
            beta_cell(p.beta),
            s.mu.into(),
            s.delta.into(),
            s.rho0.into(),
            s.rho_c.into(),
            Cell::Bool(s.condensed),
        ]);
    }
    Ok(table)
}

fn occupations(cfg: &RunConfig) -> anyhow::Result<Table> {
    let p = &cfg.params;
    let sol = solve_equilibrium(p).context("equilibrium")?;
    let k_max = match (cfg.k_max, p.beta()) {
        (Some(k), _) => k,
        (None, Beta::Finite(b)) => (2.0 * p.mass() * 20.0 / b).sqrt(),
        (None, Beta::Infinite) => {
            return Err(UsageError("--k-max is required at beta = inf".into()).into())
        }
    };
    let mut table = Table::new(&[
        "k",
        "eps_plus_delta",
        "e_minus",
        "e_plus",
        "n_minus",
        "n_plus",
    ]);
    let grid: Vec<f64> = (1..=cfg.k_steps)
        .map(|i| k_max * (i as f64 / cfg.k_steps as f64))
        .collect();
    for k in grid {
        let bp = BranchPoint::evaluate(p, sol.delta, Momentum::along_x(k))
            .with_context(|| format!("occupation at k = {k}"))?;
        table.push(vec![
            k.into(),
            bp.f_k.into(),
            bp.e_minus.into(),
            bp.e_plus.into(),
            bp.n_minus.into(),
            bp.n_plus.into(),
        ]);
    }
    Ok(table)
}

fn fluctuations(cfg: &RunConfig) -> anyhow::Result<Table> {
    let p = &cfg.params;
    let sol = solve_equilibrium(p).context("equilibrium")?;
    let phase = relative_phase_report(p, &sol).context("relative phase report")?;
    let rel = relative_pair_report(p, &sol);
    let tot =
        total_pair_report(p, &sol, &cfg.k).context("total-pair fluctuations Var F_k(n_tot)")?;
    let mut table = Table::new(&["quantity", "value"]);
    let mut row = |name: &str, v: f64| table.push(vec![Cell::Text(name.into()), v.into()]);
    row("rho0", sol.rho0);
    row("mu", sol.mu);
    row("k_x", cfg.k.0[0]);
    row("k_y", cfg.k.0[1]);
    row("k_z", cfg.k.0[2]);
    row("var_n_tot", tot.var_n_tot);
    row("var_phi_tot", tot.var_phi_tot);
    row("commutator_tot", tot.commutator_scalar);
    row("uncertainty_product", tot.uncertainty_product);
    row("c_rel", rel.c_rel);
    if let Some(d) = rel.duhamel_nn {
        row("duhamel_nn", d);
    }
    row("var_n_rel", rel.var_n_rel);
    row("var_j_rel", rel.var_j_rel);
    row("var_phi_rel", phase.var_phi_rel);
    row("phase_link", phase.link_coefficient);
    row("var_j0_rel", phase.j0_variance);
    row(
        "distance_j0_phi",
        condensate_current_phase_distance(p, &sol).context("coarse-grain distance j0 vs phi")?,
    );
    row(
        "distance_j_j0",
        current_zero_mode_distance(p, &sol).context("coarse-grain distance j vs j0")?,
    );
    Ok(table)
}

fn dynamics(cfg: &RunConfig) -> anyhow::Result<Table> {
    let p = &cfg.params;
    let sol = solve_equilibrium(p).context("equilibrium")?;
    let times = time_grid(cfg.t_max, cfg.t_steps)?;
    let current = phi_current_trace(p, &sol, &times).context("phi-current trace")?;
    let mut table = Table::new(&["t", "corr_nn", "corr_jj_phi"]);
    for (t, j) in times.iter().zip(&current.values) {
        let n = autocorrelation_n(p, &sol, *t).context("autocorrelation")?;
        table.push(vec![(*t).into(), n.into(), (*j).into()]);
    }
    Ok(table)
}

fn converge(cfg: &RunConfig) -> anyhow::Result<Table> {
    let p = &cfg.params;
    let lambda_t = p.thermal_wavelength().ok_or_else(|| {
        UsageError("converge needs a finite beta (box lengths are in thermal wavelengths)".into())
    })?;
    let lengths: Vec<f64> = cfg.l_seq.iter().map(|m| m * lambda_t).collect();
    let k = if cfg.k_given {
        cfg.k
    } else {
        // smallest mode of the smallest box; on every box that is a multiple of it
        Momentum::along_x(std::f64::consts::TAU / lengths[0])
    };
    let quantity = LatticeQuantity::parse(&cfg.quantity, k)?;
    let sol = solve_equilibrium(p).context("equilibrium")?;
    let report = convergence_report(quantity, p, &sol, &lengths, cfg.cutoff)
        .with_context(|| format!("lattice convergence of {}", quantity.label()))?;
    let mut table = Table::new(&["L", "oracle", "closed_form", "abs_err"]);
    for r in &report.rows {
        table.push(vec![
            r.length.into(),
            r.oracle.into(),
            r.closed_form.into(),
            r.abs_err.into(),
        ]);
    }
    let verdict = if report.verdict { "pass" } else { "fail" };
    table.trailer.push((
        "quantity".into(),
        report.quantity.clone(),
        json!(report.quantity),
    ));
    table.trailer.push((
        "final_relative_error".into(),
        format!("{:?}", report.final_relative_error()),
        json!(report.final_relative_error()),
    ));
    table
        .trailer
        .push(("verdict".into(), verdict.into(), json!(verdict)));
    Ok(table)
}
