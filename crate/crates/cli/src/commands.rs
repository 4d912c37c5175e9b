//! One function per subcommand. Each writes its CSV files into the output
//! directory and returns the paths written.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use frpmg::exec::Execution;
use frpmg::fourier::{build_propagators, error_history, history_sum, DualTimeConfig};
use frpmg::fr_ops::build_bloch;
use frpmg::linalg;
use frpmg::output::{push_complex, Cell, Table};
use frpmg::pmg::{cycle_matrix, CoarseSource, FourierLevels};
use frpmg::sweeps::{
    advection_dtau_max, argmax_benefit, contour_table, contraction_table, cycle_run_table,
    mode_energies, sweep_cfl_coupled, sweep_cfl_explicit, sweep_contraction, sweep_error,
    sweep_stability, ContractionSweep, CycleSetup,
};
use frpmg::timedomain::{write_snapshot, DualTimeSolver, Grid1D};
use frpmg::{CMat, CVec, RMat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;

pub struct RunContext<'a> {
    pub cfg: &'a Config,
    pub out: &'a Path,
    pub exec: Execution,
    pub seed: u64,
}

fn write_table(dir: &Path, name: &str, table: &Table) -> Result<PathBuf> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    table.write(BufWriter::new(file))?;
    Ok(path)
}

fn push_matrix(t: &mut Table, name: &str, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let mut row = vec![Cell::from(name), Cell::from(i), Cell::from(j)];
            push_complex(&mut row, m[(i, j)]);
            t.push(row);
        }
    }
}

/// Operator matrices of degree `p`, and the Bloch matrix at the first
/// configured wavenumber. Columns `matrix,row,col,re,im`.
pub fn operators(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let ops = cx.cfg.ops()?;
    let mut t = Table::new(
        cx.cfg.header("operators"),
        &["matrix", "row", "col", "re", "im"],
    );
    let real: [(&str, &RMat); 10] = [
        ("D", &ops.d),
        ("C-", ops.cm()),
        ("C0", ops.c0()),
        ("C+", ops.cp()),
        ("B-2", &ops.bm2),
        ("B-1", &ops.bm),
        ("B0", &ops.b0),
        ("B+1", &ops.bp),
        ("B+2", &ops.bp2),
        (
            "nodes",
            &RMat::from_column_slice(ops.nodes.len(), 1, &ops.nodes),
        ),
    ];
    for (name, m) in real {
        push_matrix(&mut t, name, &linalg::to_complex(m));
    }
    if let Some(&(_, k)) = cx.cfg.wavenumbers().first() {
        let op = build_bloch(&ops, cx.cfg.space.h, cx.cfg.space.mu, k)?;
        t.header.push("k", k);
        push_matrix(&mut t, "Q", &op.q);
    }
    Ok(vec![write_table(cx.out, "operators.csv", &t)?])
}

/// Unity-amplification contours. Columns `curve,segment,x0,y0,x1,y1`.
pub fn stability(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let dual = cx.cfg.dual_time()?;
    let scan = &cx.cfg.sweep.stability;
    let contours = sweep_stability(&dual, scan, cx.exec)?;
    let header = cx
        .cfg
        .header("stability")
        .with("nx", scan.nx)
        .with("ny", scan.ny)
        .with("history", format!("{:?}", scan.history).to_lowercase())
        .with("axes", "lambda*dtau");
    Ok(vec![write_table(
        cx.out,
        "stability.csv",
        &contour_table(&contours, header),
    )?])
}

/// `Δτ_max` curves.
pub fn cfl(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let dual = cx.cfg.dual_time()?;
    let sw = &cx.cfg.sweep;
    let header = cx
        .cfg
        .header("cfl")
        .with("mode", format!("{:?}", sw.cfl_mode).to_lowercase())
        .with("n_k", sw.n_k);
    let table = match sw.cfl_mode {
        crate::config::CflMode::Explicit => {
            let ops = sw
                .ps
                .iter()
                .map(|&p| cx.cfg.ops_for(p))
                .collect::<Result<Vec<_>>>()?;
            sweep_cfl_explicit(
                &ops,
                &sw.mus.points(),
                cx.cfg.space.h,
                &dual,
                &cx.cfg.k_grid(),
                cx.exec,
                header,
            )?
        }
        crate::config::CflMode::Coupled => sweep_cfl_coupled(
            &cx.cfg.ops()?,
            cx.cfg.space.mu,
            cx.cfg.space.h,
            &dual,
            &sw.ms,
            &sw.dts.points(),
            &cx.cfg.k_grid(),
            cx.exec,
            header,
        )?,
    };
    Ok(vec![write_table(cx.out, "cfl.csv", &table)?])
}

/// Error after every pseudo step. Columns `k_hat,k,m,error`.
pub fn error(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let k_hats: Vec<f64> = cx.cfg.wavenumbers().iter().map(|w| w.0).collect();
    let t = sweep_error(
        &cx.cfg.ops()?,
        cx.cfg.space.h,
        cx.cfg.space.mu,
        &cx.cfg.dual_time()?,
        &k_hats,
        cx.exec,
        cx.cfg.header("error"),
    )?;
    Ok(vec![write_table(cx.out, "error.csv", &t)?])
}

/// Contraction of the configured cycle against plain smoothing over
/// `Δt/Δτ`.
pub fn contraction(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let ops = cx.cfg.ops()?;
    let mut dual = cx.cfg.dual_time()?;
    if let Some(f) = cx.cfg.sweep.dtau_factor {
        dual.dtau = f * advection_dtau_max(&ops, cx.cfg.space.h, &dual)?;
    }
    let (_, k) = *cx
        .cfg
        .wavenumbers()
        .first()
        .context("no wavenumber configured")?;
    let cycle = cx.cfg.cycle_spec(None, 1)?;
    let sweep = ContractionSweep {
        ops,
        h: cx.cfg.space.h,
        mu: cx.cfg.space.mu,
        k,
        cfg: dual.clone(),
        ratios: cx.cfg.sweep.ratios.points(),
        cycle,
        smoother: cx.cfg.smoother(),
        form: cx.cfg.contraction_form(),
    };
    let points = sweep_contraction(&sweep, cx.exec)?;
    if let Some(i) = argmax_benefit(&points) {
        println!(
            "largest benefit at dt/dtau = {:.4} (gamma_pmg/gamma_base = {:.6})",
            points[i].ratio,
            points[i].relative()
        );
    }
    let header = cx
        .cfg
        .header("contraction")
        .with("dtau", dual.dtau)
        .with("k", k)
        .with("cycle", &cx.cfg.cycle.preset)
        .with("smoother", format!("{:?}", cx.cfg.smoother()));
    Ok(vec![write_table(
        cx.out,
        "contraction.csv",
        &contraction_table(&points, header),
    )?])
}

fn setup_at(cfg: &Config, k: f64) -> Result<CycleSetup> {
    let op = build_bloch(&cfg.ops()?, cfg.space.h, cfg.space.mu, k)?;
    Ok(CycleSetup::new(op, cfg.dual_time()?, cfg.smoother()))
}

/// Error-mode energies per cycle for each compared cycle. Columns
/// `k_hat,cycle_type,cycle,tau,mode,energy`.
pub fn modes(cx: &RunContext) -> Result<Vec<PathBuf>> {
    let mut t = Table::new(
        cx.cfg
            .header("modes")
            .with("n_cycles", cx.cfg.cycle.n_cycles),
        &["k_hat", "cycle_type", "cycle", "tau", "mode", "energy"],
    );
    for (k_hat, k) in cx.cfg.wavenumbers() {
        let setup = setup_at(cx.cfg, k)?;
        let names = &cx.cfg.sweep.cycles;
        let runs = cx.exec.map(names, |name| {
            let spec = cx.cfg.cycle_spec(Some(name), 1)?;
            Ok::<_, anyhow::Error>(setup.run(&spec, cx.cfg.cycle.n_cycles)?)
        });
        for (name, recs) in names.iter().zip(runs) {
            let recs = recs?;
            for (r, e) in recs.iter().zip(mode_energies(&recs)) {
                for (j, v) in e.iter().enumerate() {
                    t.push(vec![
                        Cell::from(k_hat),
                        Cell::from(name.as_str()),
                        Cell::from(r.cycle),
                        Cell::from(r.tau),
                        Cell::from(j),
                        Cell::from(*v),
                    ]);
                }
            }
        }
    }
    Ok(vec![write_table(cx.out, "modes.csv", &t)?])
}

/// Per-cycle convergence for each configured wavenumber, one file each.
pub fn cycle_run(cx: &RunContext, cycle: Option<&str>) -> Result<Vec<PathBuf>> {
    let spec = cx.cfg.cycle_spec(cycle, 1)?;
    let name = cycle.unwrap_or(&cx.cfg.cycle.preset).to_string();
    let ks = cx.cfg.wavenumbers();
    let runs = cx.exec.map(&ks, |&(_, k)| {
        Ok::<_, anyhow::Error>(setup_at(cx.cfg, k)?.run(&spec, cx.cfg.cycle.n_cycles)?)
    });
    let mut paths = Vec::new();
    for (i, (&(k_hat, k), recs)) in ks.iter().zip(runs).enumerate() {
        let header = cx
            .cfg
            .header("cycle-run")
            .with("cycle", &name)
            .with("f_tau", spec.f_tau)
            .with("k_hat", k_hat)
            .with("k", k);
        paths.push(write_table(
            cx.out,
            &format!("cycle_run_{i}.csv"),
            &cycle_run_table(&recs?, header),
        )?);
    }
    Ok(paths)
}

/// Outcome of [`verify`].
pub struct Verification {
    pub max_rel_deviation: f64,
    pub tolerance: f64,
    pub paths: Vec<PathBuf>,
}

/// Fourier predictions against the physical-space solver on a periodic
/// grid:
///
/// * error after every pseudo step for the resolved wave;
/// * one full physical step from a random element state (seeded);
/// * one cycle of the configured multigrid cycle from the same state.
pub fn verify(cx: &RunContext) -> Result<Verification> {
    const TOL: f64 = 1e-8;
    let cfg = cx.cfg;
    let ops = cfg.ops()?;
    let dual = cfg.dual_time()?;
    let grid = Grid1D::new(cfg.space.n_elements, cfg.space.h)?;
    let (k_hat, k_req) = *cfg
        .wavenumbers()
        .first()
        .context("no wavenumber configured")?;
    let j = (k_req / grid.wavenumber(1)).round() as i64;
    let k = grid.wavenumber(j);
    if j == 0 || (k - k_req).abs() > 1e-9 * k_req.abs() {
        bail!(
            "k = {k_req} is not a Fourier mode of a {}-element grid (nearest is j = {j}); adjust space.n_elements",
            grid.n
        );
    }
    let mu = cfg.space.mu;
    let op = build_bloch(&ops, grid.h, mu, k)?;
    let omega = op.omega();
    let history = |u: &CVec| -> Vec<CVec> {
        (0..dual.bdf.order())
            .map(|l| u * (Complex64::i() * omega * (l as f64 * dual.dt)).exp())
            .collect()
    };

    // Pseudo-step error history of the resolved wave.
    let predicted = error_history(&op, &dual, omega, dual.m)?;
    let solver = DualTimeSolver::new(&ops, grid, mu, &dual, None, cfg.smoother())?;
    let u_n = grid.bloch_wave(&ops, k);
    let exact = &u_n * (-Complex64::i() * omega * dual.dt).exp();
    let scale = (grid.n as f64).sqrt();
    let mut t = Table::new(
        cfg.header("verify")
            .with("k_hat", k_hat)
            .with("k", k)
            .with("n_elements", grid.n),
        &["m", "fourier", "timedomain", "rel_deviation"],
    );
    let mut worst: f64 = 0.0;
    let report = solver.step_observed(&history(&u_n), &mut |m, u| {
        let e = linalg::norm2(&(u - &exact)) / scale;
        let rel = (e - predicted[m]).abs() / predicted[m].max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        t.push(vec![
            Cell::from(m),
            Cell::from(predicted[m]),
            Cell::from(e),
            Cell::from(rel),
        ]);
    })?;
    let mut paths = vec![write_table(cx.out, "verify.csv", &t)?];
    let snap = File::create(cx.out.join("snapshot.csv"))?;
    write_snapshot(
        BufWriter::new(snap),
        &ops,
        &grid,
        &report.u,
        cfg.header("verify").with("step", 1).with("k", k),
    )?;
    paths.push(cx.out.join("snapshot.csv"));
    println!("pseudo-step error history: max relative deviation {worst:.3e}");

    // Random element state through a full physical step and one cycle.
    let mut rng = ChaCha8Rng::seed_from_u64(cx.seed);
    let v = CVec::from_fn(ops.n_points(), |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let u0 = grid.replicate(&v, k);
    let sigma = history_sum(&dual.bdf, omega, dual.dt);
    let rel = |a: &CVec, b: &CVec| linalg::norm2(&(a - b)) / linalg::norm2(b);

    let props = build_propagators(&op, &dual, omega)?;
    let step = solver.step(&history(&u0))?.u;
    let dev_step = rel(&step, &grid.replicate(&(&props.r_m * &v), k));
    println!(
        "random state, {} pseudo steps: relative deviation {dev_step:.3e}",
        dual.m
    );
    worst = worst.max(dev_step);

    if cfg.cycle.preset != "none" || cfg.cycle.legs.is_some() {
        let spec = cfg.cycle_spec(None, 1)?;
        let one = DualTimeConfig {
            m: 1,
            ..dual.clone()
        };
        let levels = FourierLevels::new(&op, &one, spec.coarsest(), spec.f_tau, cfg.smoother())?;
        let s = cycle_matrix(&levels, &spec, sigma, CoarseSource::Restricted)?;
        let cyc = DualTimeSolver::new(&ops, grid, mu, &one, Some(spec), cfg.smoother())?;
        let got = cyc.step(&history(&u0))?.u;
        let dev_cycle = rel(&got, &grid.replicate(&(s * &v), k));
        println!(
            "random state, one {} cycle: relative deviation {dev_cycle:.3e}",
            cfg.cycle.preset
        );
        worst = worst.max(dev_cycle);
    }
    println!("max relative deviation {worst:.3e} (tolerance {TOL:e})");
    Ok(Verification {
        max_rel_deviation: worst,
        tolerance: TOL,
        paths,
    })
}

pub fn resolved_config(cfg: &Config, out: &Path) -> Result<PathBuf> {
    let path = out.join("config.resolved.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg)?)?;
    Ok(path)
}
