//! Running a validated experiment and writing its artifacts.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use qca_core::automata::{cell_period, AutomatonSpec, WaveVector};
use qca_core::deformed::{default_deformation, deformed_boost, DeformationMap, EnergyMomentum};
use qca_core::dispersive::compare_evolutions;
use qca_core::maxwell::dispersion_surface;
use qca_core::packets::{make_packet, position_mean, position_variance, Envelope, ModeTable, MomentumGrid, PacketSpec};
use qca_core::pheno::{grb_time_lag, travel_time_report, Dimension, PlanckQuantity, ReportValue};
use qca_core::scattering::{
    klein_scan, plateau_bounds, refine_plateau, run_scattering, Regime, ScatteringGeometry, ScatteringResult,
};
use qca_core::spectral::{diffusion_tensor, dispersion, group_velocity};
use qca_core::zitter::{decompose_trajectory, fit_oscillation};
use qca_core::QcaError;

use crate::config::{AutomatonParams, ExperimentConfig, PacketParams, Params};
use crate::output::{self, json_document, write_atomic, Cell, Header, Table};
use crate::CliError;

/// What a run produced, before it is written out.
#[derive(Debug)]
pub enum Artifact {
    Csv(Table),
    /// A table plus a JSON sidecar stored as `<stem>.<suffix>`.
    CsvWithSidecar {
        table: Table,
        suffix: &'static str,
        sidecar: serde_json::Value,
    },
    Json(serde_json::Value),
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub primary: PathBuf,
    pub sidecar: Option<PathBuf>,
}

fn automaton(a: &AutomatonParams) -> Result<AutomatonSpec, QcaError> {
    AutomatonSpec::new(a.model, a.chirality, a.mass)
}

fn packet_spec(p: &PacketParams) -> Result<PacketSpec, QcaError> {
    let k0 = WaveVector::new(&p.k0)?;
    let mut spec = PacketSpec::gaussian(k0, p.sigma, p.c_plus, p.c_minus).at(&p.x0);
    if let Some(h) = &p.hermite {
        spec = spec.with_envelope(Envelope::Hermite {
            coefficients: h.clone(),
        });
    }
    spec.validate()?;
    Ok(spec)
}

fn sample_times(t_max: i64, t_step: i64) -> Vec<i64> {
    let mut ts: Vec<i64> = (0..=t_max).step_by(t_step as usize).collect();
    if ts.last() != Some(&t_max) {
        ts.push(t_max);
    }
    ts
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Transmitting => "transmitting",
        Regime::Gap => "gap",
        Regime::Klein => "klein",
    }
}

fn scatter_row(r: &ScatteringResult) -> Vec<Cell> {
    vec![
        r.phi.into(),
        r.r.into(),
        r.t.into(),
        r.k_prime.into(),
        r.v_transmitted.into(),
        Cell::Text(regime_name(r.regime)),
    ]
}

const SCATTER_COLUMNS: [&str; 6] = ["phi", "R", "T", "k_prime", "v_transmitted", "regime"];

/// `n` evenly spaced points from `a` to `b` inclusive.
fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Serialize)]
struct PlateauReport {
    mass: f64,
    level: f64,
    interpolated: Option<(f64, f64)>,
    refined: Option<(f64, f64)>,
    width: Option<f64>,
    refine_error: Option<String>,
    gap_width: f64,
}

/// Run the experiment and return its data, without touching the filesystem.
pub fn compute(config: &ExperimentConfig) -> Result<Artifact, QcaError> {
    match &config.params {
        Params::Dispersion {
            automaton: a,
            samples,
            direction,
        } => {
            let spec = automaton(a)?;
            let period = cell_period(a.model.dim());
            let rows: Vec<Vec<Cell>> = (0..*samples)
                .into_par_iter()
                .map(|i| {
                    let s = -period / 2.0 + period * i as f64 / *samples as f64;
                    let k = WaveVector::new(&direction.iter().map(|d| d * s).collect::<Vec<_>>())?;
                    let omega = dispersion(&spec, &k)?;
                    // at a band touching the derivatives are undefined
                    let (v, d) = match (group_velocity(&spec, &k), diffusion_tensor(&spec, &k)) {
                        (Ok(v), Ok(d)) => {
                            let proj: f64 = v.iter().zip(direction).map(|(a, b)| a * b).sum();
                            let mut dn = 0.0;
                            for (i, a) in direction.iter().enumerate() {
                                for (j, b) in direction.iter().enumerate() {
                                    dn += a * d[(i, j)] * b;
                                }
                            }
                            (Cell::Num(proj), Cell::Num(dn))
                        }
                        (Err(QcaError::Degenerate { .. }), _) | (_, Err(QcaError::Degenerate { .. })) => {
                            (Cell::Empty, Cell::Empty)
                        }
                        (Err(e), _) | (_, Err(e)) => return Err(e),
                    };
                    Ok(vec![Cell::Num(s), Cell::Num(omega), v, d])
                })
                .collect::<Result<_, QcaError>>()?;
            Ok(Artifact::Csv(Table {
                columns: vec!["k", "omega", "v", "D"],
                rows,
            }))
        }
        Params::Evolve {
            automaton: a,
            packet,
            grid,
            t_max,
            t_step,
        } => {
            let spec = automaton(a)?;
            let grid = MomentumGrid::new(a.model.dim(), *grid)?;
            let state = make_packet(&packet_spec(packet)?, &grid, &spec)?;
            let table = ModeTable::new(&grid, &spec)?;
            let rows = sample_times(*t_max, *t_step)
                .into_par_iter()
                .map(|t| {
                    let s = table.evolve(&state, t)?;
                    Ok(vec![
                        Cell::Int(t),
                        s.norm_sqr().sqrt().into(),
                        position_mean(&s)?[0].into(),
                        position_variance(&s)?.into(),
                    ])
                })
                .collect::<Result<_, QcaError>>()?;
            Ok(Artifact::Csv(Table {
                columns: vec!["t", "norm", "mean_x", "variance"],
                rows,
            }))
        }
        Params::Dispersive {
            automaton: a,
            packet,
            grid,
            t_max,
            t_step,
        } => {
            let spec = automaton(a)?;
            let grid = MomentumGrid::new(a.model.dim(), *grid)?;
            let cmp = compare_evolutions(&spec, &packet_spec(packet)?, &grid, &sample_times(*t_max, *t_step))?;
            let mut table = Table::new(&["t", "l2_error", "overlap"]);
            for c in cmp {
                table.push(vec![Cell::Int(c.t), c.l2_error.into(), c.overlap.into()]);
            }
            Ok(Artifact::Csv(table))
        }
        Params::Zitter {
            mass,
            packet,
            grid,
            t_max,
        } => {
            let spec = AutomatonSpec::dirac(1, *mass)?;
            let grid = MomentumGrid::new(1, *grid)?;
            let d = decompose_trajectory(&packet_spec(packet)?, &spec, &grid, *t_max)?;
            let mut table = Table::new(&["t", "x_total", "x_plus", "x_minus", "x_int"]);
            for i in 0..d.times.len() {
                table.push(vec![
                    Cell::Int(d.times[i]),
                    d.x_total[i].into(),
                    d.x_plus[i].into(),
                    d.x_minus[i].into(),
                    d.x_int[i].into(),
                ]);
            }
            let fit = match fit_oscillation(&d) {
                Ok(f) => json!({ "fit": f }),
                Err(e) => json!({ "fit_error": e.to_string() }),
            };
            let mut sidecar = json!({
                "drift_velocity": d.drift_velocity(),
                "identity_residual": d.identity_residual(),
                "pure_branch": d.pure_branch,
                "mean_position_final": d.mean_position_at(*t_max),
                "omega0_over_pi": dispersion(&spec, &WaveVector::d1(0.0))? / PI,
            });
            sidecar.as_object_mut().expect("object").extend(fit.as_object().expect("object").clone());
            Ok(Artifact::CsvWithSidecar {
                table,
                suffix: "fit.json",
                sidecar,
            })
        }
        Params::Scatter { mass, k0, sigma, phi } => {
            let geometry = ScatteringGeometry::for_packet(*sigma)?;
            let r = run_scattering(*mass, *k0, *sigma, *phi, &geometry)?;
            Ok(Artifact::Csv(Table {
                columns: SCATTER_COLUMNS.to_vec(),
                rows: vec![scatter_row(&r)],
            }))
        }
        Params::KleinScan {
            mass,
            k0,
            sigma,
            phi_min,
            phi_max,
            phi_points,
            level,
            refine,
        } => {
            let geometry = ScatteringGeometry::for_packet(*sigma)?;
            let phis = linspace(*phi_min, *phi_max, *phi_points);
            let scan = klein_scan(*mass, *k0, *sigma, &phis, &geometry)?;
            let interpolated = plateau_bounds(&scan, *level);
            let (refined, refine_error) = if *refine == 0 {
                (None, None)
            } else {
                match refine_plateau(*mass, *k0, *sigma, &scan, &geometry, *level, *refine) {
                    Ok(b) => (Some(b), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            let best = refined.or(interpolated);
            let n = ((1.0 - mass) * (1.0 + mass)).sqrt();
            let report = PlateauReport {
                mass: *mass,
                level: *level,
                interpolated,
                refined,
                width: best.map(|(a, b)| b - a),
                refine_error,
                gap_width: 2.0 * n.acos(),
            };
            Ok(Artifact::CsvWithSidecar {
                table: Table {
                    columns: SCATTER_COLUMNS.to_vec(),
                    rows: scan.iter().map(scatter_row).collect(),
                },
                suffix: "plateau.json",
                sidecar: serde_json::to_value(report).expect("report serializes"),
            })
        }
        Params::Maxwell {
            chirality,
            samples,
            k_max,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut ks = Vec::with_capacity(*samples);
            while ks.len() < *samples {
                let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-*k_max..*k_max));
                if k != [0.0; 3] {
                    ks.push(WaveVector::d3(k[0], k[1], k[2]));
                }
            }
            let surface = dispersion_surface(&ks, *chirality)?;
            let mut table = Table::new(&["kx", "ky", "kz", "omega", "c", "tilt"]);
            for p in surface {
                table.push(vec![
                    p.k[0].into(),
                    p.k[1].into(),
                    p.k[2].into(),
                    p.omega.into(),
                    p.c.into(),
                    p.tilt.into(),
                ]);
            }
            Ok(Artifact::Csv(table))
        }
        Params::Boost { mass, ks, betas } => {
            let map = default_deformation(*mass)?;
            let pairs: Vec<(f64, f64)> = ks.iter().flat_map(|&k| betas.iter().map(move |&b| (k, b))).collect();
            let rows = pairs
                .par_iter()
                .map(|&(k, beta)| {
                    let p = EnergyMomentum::on_shell_at(*mass, k);
                    match deformed_boost(beta, &p, &map) {
                        Ok(q) => {
                            let (bo, bk) = map.forward(q.omega, q.k)?;
                            Ok(vec![
                                k.into(),
                                beta.into(),
                                q.omega.into(),
                                q.k.into(),
                                bo.into(),
                                bk.into(),
                                q.on_shell_residual().into(),
                            ])
                        }
                        // boosted out of the deformation domain: no image
                        Err(QcaError::OutOfDomain { .. }) => {
                            let mut row = vec![k.into(), beta.into()];
                            row.resize(7, Cell::Empty);
                            Ok(row)
                        }
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_, QcaError>>()?;
            Ok(Artifact::Csv(Table {
                columns: vec!["k_in", "beta", "omega", "k", "Omega", "K", "onshell_residual"],
                rows,
            }))
        }
        Params::Pheno { mass, width_m, grb } => {
            let m = PlanckQuantity::planck(*mass, Dimension::Mass);
            let w = PlanckQuantity::si(*width_m, Dimension::Length);
            let report = travel_time_report(&m, &w)?;
            let mut data = serde_json::to_value(&report).expect("report serializes");
            data["planck_constants"] = json!({
                "length_m": qca_core::pheno::planck::LENGTH_M,
                "time_s": qca_core::pheno::planck::TIME_S,
                "mass_kg": qca_core::pheno::planck::MASS_KG,
            });
            if let Some(g) = grb {
                let l = PlanckQuantity::si(g.distance_m, Dimension::Length);
                let k1 = WaveVector::d3(g.k1[0], g.k1[1], g.k1[2]);
                let k2 = WaveVector::d3(g.k2[0], g.k2[1], g.k2[2]);
                let lag: ReportValue = grb_time_lag(&l, &k1, &k2)?.into();
                data["grb"] = json!({
                    "distance": ReportValue::from(l),
                    "k1": g.k1,
                    "k2": g.k2,
                    "time_lag": lag,
                });
            }
            Ok(Artifact::Json(data))
        }
    }
}

/// Run `config` and write its artifacts. The primary path is the config's
/// `output`, else `$QCA_OUTPUT_DIR/<command>.<ext>`, else the working
/// directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let artifact = compute(config).map_err(|e| CliError::Runtime(format!("{}: {e}", config.command)))?;
    let elapsed = start.elapsed().as_secs_f64();
    let header = Header::new(config, elapsed);
    let primary = config.output.clone().unwrap_or_else(|| output::default_output(config));
    let io = |p: &std::path::Path| {
        let p = p.display().to_string();
        move |e: std::io::Error| CliError::Io(format!("{p}: {e}"))
    };
    match artifact {
        Artifact::Csv(table) => {
            let text = format!("{}{}", output::header_line(&header), table.data_section());
            write_atomic(&primary, &text).map_err(io(&primary))?;
            Ok(RunOutput { primary, sidecar: None })
        }
        Artifact::CsvWithSidecar { table, suffix, sidecar } => {
            let side = output::sidecar(&primary, suffix);
            write_atomic(&side, &json_document(&header, &sidecar)).map_err(io(&side))?;
            let text = format!("{}{}", output::header_line(&header), table.data_section());
            if let Err(e) = write_atomic(&primary, &text) {
                let _ = std::fs::remove_file(&side);
                return Err(io(&primary)(e));
            }
            Ok(RunOutput {
                primary,
                sidecar: Some(side),
            })
        }
        Artifact::Json(data) => {
            write_atomic(&primary, &json_document(&header, &data)).map_err(io(&primary))?;
            Ok(RunOutput { primary, sidecar: None })
        }
    }
}
