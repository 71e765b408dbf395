//! The five subcommands, built on the library crate.

use std::path::Path;

use starris_core::analysis::{
    asymptotic_outage, estimate_diversity_order, monte_carlo_outage_adaptive, AnalysisError,
    OracleCdf, OutageCurve, OutagePoint, PointKind, DEFAULT_TAIL_FRACTION,
};
use starris_core::beamform::beam_peak;
use starris_core::channel::{
    coverage_map, far_field_gain, field_boundary, los_phase_vector, near_field_channel,
    steering_vector, ChannelError, PlaneSpec,
};
use starris_core::surface::PASSIVITY_TOLERANCE;
use starris_core::{Side, Vec3};

use crate::output::{csv_text, fmt_float, fmt_optional, write_outputs};
use crate::scenario::{ScenarioDocument, SurfaceKindName};

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable, unparseable or physically invalid scenario (exit 2).
    Schema(String),
    /// The scenario parsed but a computation on it failed (exit 3).
    Computation(String),
    /// A Monte Carlo slope fit was requested but the probability floor
    /// left too few usable points (exit 4).
    McFloor(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Computation(_) => 3,
            Failure::McFloor(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Schema(m) | Failure::Computation(m) | Failure::McFloor(m) => m,
        }
    }
}

fn schema<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Schema(e.to_string())
}

fn computation<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Computation(e.to_string())
}

/// Decorrelates per-point Monte Carlo seeds from the master seed
/// (splitmix-style avalanche on the point index).
fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn cmd_coverage(
    doc: &ScenarioDocument,
    preset: Option<&str>,
    csv_path: &Path,
    seed: u64,
) -> Result<(), Failure> {
    let aperture = doc.aperture().map_err(schema)?;
    let config = doc.surface_config().map_err(schema)?;
    let incident = doc
        .incident_field()
        .coefficients(&aperture)
        .map_err(schema)?;
    let boundary = field_boundary(&aperture);
    println!("field boundary: {} m", fmt_float(boundary));

    let grid = &doc.run.grid;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["z_m".to_string()];
    // column header carries the x coordinates; both side blocks share it
    let reflect_plane = PlaneSpec::new(
        (grid.x_min_m, grid.x_max_m),
        (-grid.z_max_m, -grid.z_min_m),
        grid.x_count,
        grid.z_count,
    )
    .map_err(schema)?;
    let transmit_plane = PlaneSpec::new(
        (grid.x_min_m, grid.x_max_m),
        (grid.z_min_m, grid.z_max_m),
        grid.x_count,
        grid.z_count,
    )
    .map_err(schema)?;

    for (side, plane) in [
        (Side::Reflect, &reflect_plane),
        (Side::Transmit, &transmit_plane),
    ] {
        let map = coverage_map(&config, &incident, plane, side, doc.run.include_leaning)
            .map_err(computation)?;
        if header.len() == 1 {
            header.extend(map.xs.iter().map(|&x| fmt_float(x)));
            rows.push(header.clone());
        }
        let peak = beam_peak(&map, boundary).map_err(computation)?;
        let label = match side {
            Side::Transmit => "transmit",
            Side::Reflect => "reflect",
        };
        println!(
            "peak {label}: angle_deg {} gain {}",
            fmt_float(peak.angle.to_degrees()),
            fmt_float(peak.gain)
        );
        for (iz, &z) in map.zs.iter().enumerate() {
            let mut row = vec![fmt_float(z)];
            row.extend((0..map.xs.len()).map(|ix| fmt_float(map.value(iz, ix))));
            rows.push(row);
        }
    }

    let csv = csv_text(&rows);
    write_outputs(
        csv_path,
        &csv,
        "coverage",
        preset,
        seed,
        &doc.resolved(seed),
    )
    .map_err(computation)
}

pub fn cmd_gain_profile(
    doc: &ScenarioDocument,
    preset: Option<&str>,
    csv_path: &Path,
    seed: u64,
) -> Result<(), Failure> {
    let aperture = doc.aperture().map_err(schema)?;
    let config = doc.surface_config().map_err(schema)?;
    let incident = doc
        .incident_field()
        .coefficients(&aperture)
        .map_err(schema)?;
    let path_loss = doc.path_loss();
    let tx = doc.tx_position();
    let h_far = los_phase_vector(&aperture, tx).map_err(schema)?;

    let cut = &doc.run.cut;
    if cut.points < 2 || !(cut.max_wavelengths > 0.0) {
        return Err(Failure::Schema(
            "run.cut needs points >= 2 and max_wavelengths > 0".into(),
        ));
    }
    let theta = cut.angle_deg.to_radians();
    let lambda = doc.aperture.wavelength_m;

    let mut rows = vec![vec![
        "d_wavelengths".to_string(),
        "near_gain_leaning".to_string(),
        "near_gain_flat".to_string(),
        "far_field_gain".to_string(),
    ]];
    for i in 0..cut.points {
        let d_wl =
            -cut.max_wavelengths + 2.0 * cut.max_wavelengths * i as f64 / (cut.points - 1) as f64;
        let d_m = d_wl * lambda;
        // the cut is mirror-symmetric about the surface: distance |d| at
        // the cut angle on each side, negative d on the transmit side
        let rx = Vec3::new(
            d_m.abs() * theta.sin(),
            0.0,
            -d_m.signum() * d_m.abs() * theta.cos(),
        );
        let side = Side::of_point(rx);

        let near = |leaning: bool| near_field_channel(&config, &incident, rx, side, leaning);
        let (near_lean, near_flat) = match (near(true), near(false)) {
            (Ok(a), Ok(b)) => (a.norm(), b.norm()),
            (Err(ChannelError::TooCloseToSurface { .. }), _)
            | (_, Err(ChannelError::TooCloseToSurface { .. })) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(computation(e)),
        };

        let geometry = match starris_core::LinkGeometry::new(tx, rx) {
            Ok(g) => g,
            Err(ChannelError::NonPositiveDistance) => continue,
            Err(e) => return Err(computation(e)),
        };
        let r_far = match steering_vector(&aperture, rx) {
            Ok(v) => v,
            Err(ChannelError::NonPositiveDistance) => continue,
            Err(e) => return Err(computation(e)),
        };
        let far = far_field_gain(&geometry, &path_loss, &r_far, &h_far, &config, side)
            .map_err(computation)?;

        rows.push(vec![
            fmt_float(d_wl),
            fmt_float(near_lean),
            fmt_float(near_flat),
            fmt_float(far),
        ]);
    }

    let csv = csv_text(&rows);
    write_outputs(
        csv_path,
        &csv,
        "gain-profile",
        preset,
        seed,
        &doc.resolved(seed),
    )
    .map_err(computation)
}

fn side_label(side: Side) -> &'static str {
    match side {
        Side::Transmit => "t",
        Side::Reflect => "r",
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Transmit => "transmit",
        Side::Reflect => "reflect",
    }
}

pub fn cmd_outage(
    doc: &ScenarioDocument,
    preset: Option<&str>,
    csv_path: &Path,
    seed: u64,
) -> Result<(), Failure> {
    let sweep_db = doc.sweep_db().map_err(Failure::Schema)?;
    let mut rows = vec![vec![
        "group".to_string(),
        "gamma_t_db".to_string(),
        "p_mc".to_string(),
        "ci_halfwidth".to_string(),
        "p_asymptotic".to_string(),
        "p_oracle".to_string(),
    ]];
    let mut diversity_lines: Vec<String> = Vec::new();
    let mut mc_floor: Option<String> = None;

    for (group_index, group) in [Side::Transmit, Side::Reflect].into_iter().enumerate() {
        let scenario = doc.outage_scenario(group).map_err(Failure::Schema)?;
        let oracle = OracleCdf::build(&scenario, doc.run.oracle_resolution).map_err(schema)?;

        let mut asym_points: Vec<OutagePoint> = Vec::new();
        let mut mc_points: Vec<OutagePoint> = Vec::new();
        for (i, &db) in sweep_db.iter().enumerate() {
            let gamma_t = 10f64.powf(db / 10.0);
            let point_seed = derive_seed(seed, ((group_index as u64) << 32) | i as u64);
            let mc = monte_carlo_outage_adaptive(
                &scenario,
                gamma_t,
                doc.run.trials,
                doc.run.max_trials,
                point_seed,
            )
            .map_err(schema)?;
            let asym = asymptotic_outage(&scenario, gamma_t).map_err(computation)?;
            let p_oracle = match oracle.outage(gamma_t) {
                Ok(p) => Some(p),
                // the tail ran past the grid's resolving power; leave the
                // cell empty rather than print a digit-trustworthy value
                Err(AnalysisError::ResolutionTooCoarse { .. }) => None,
                Err(e) => return Err(computation(e)),
            };
            // Monte Carlo cells hold nothing until the event count makes
            // the estimate meaningful
            let populated = mc.events >= 10;
            rows.push(vec![
                side_label(group).to_string(),
                fmt_float(db),
                fmt_optional(populated.then_some(mc.probability)),
                fmt_optional(populated.then_some(mc.ci_halfwidth)),
                fmt_float(asym),
                fmt_optional(p_oracle),
            ]);

            if asym > 0.0 && asym <= 1.0 {
                asym_points.push(OutagePoint {
                    gamma_t,
                    probability: asym,
                    kind: PointKind::Exact,
                    ci_halfwidth: 0.0,
                });
            }
            if populated {
                mc_points.push(OutagePoint {
                    gamma_t,
                    probability: mc.probability,
                    kind: PointKind::MonteCarlo { trials: mc.trials },
                    ci_halfwidth: mc.ci_halfwidth,
                });
            }
        }

        let asym_fit = OutageCurve::new(asym_points)
            .and_then(|c| estimate_diversity_order(&c, DEFAULT_TAIL_FRACTION));
        diversity_lines.push(match asym_fit {
            Ok(d) => format!("diversity {} (asymptotic): {d:.6}", side_name(group)),
            Err(e) => format!("diversity {} (asymptotic): n/a ({e})", side_name(group)),
        });

        if doc.run.fit_mc_slope {
            let mc_fit = OutageCurve::new(mc_points)
                .and_then(|c| estimate_diversity_order(&c, DEFAULT_TAIL_FRACTION));
            match mc_fit {
                Ok(d) => diversity_lines
                    .push(format!("diversity {} (monte carlo): {d:.6}", side_name(group))),
                Err(e) => {
                    mc_floor = Some(format!(
                        "monte carlo slope fit for {} group: {e}",
                        side_name(group)
                    ));
                }
            }
        }
    }

    let csv = csv_text(&rows);
    write_outputs(csv_path, &csv, "outage", preset, seed, &doc.resolved(seed))
        .map_err(computation)?;
    for line in &diversity_lines {
        println!("{line}");
    }
    match mc_floor {
        Some(msg) => Err(Failure::McFloor(msg)),
        None => Ok(()),
    }
}

pub struct LintFinding {
    pub code: &'static str,
    pub error: bool,
    pub message: String,
}

/// Schema-plus-physics lint. Returns findings; the caller maps them to an
/// exit status (0 clean, 1 warnings only, 2 any error).
pub fn lint(doc: &ScenarioDocument) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    let surface = &doc.surface;

    if surface.kind == SurfaceKindName::Star
        && !surface.lossless_override
        && surface.beta_t + surface.beta_r > 1.0 + PASSIVITY_TOLERANCE
    {
        findings.push(LintFinding {
            code: "PASSIVITY",
            error: true,
            message: format!(
                "beta_t + beta_r = {} exceeds the passive power budget of 1",
                surface.beta_t + surface.beta_r
            ),
        });
    }
    let elements = doc.aperture.rows * doc.aperture.cols;
    if surface.kind == SurfaceKindName::Conventional && surface.m_t + surface.m_r != elements {
        findings.push(LintFinding {
            code: "PARTITION",
            error: true,
            message: format!(
                "m_t + m_r = {} does not cover the {elements}-element aperture",
                surface.m_t + surface.m_r
            ),
        });
    }
    if surface.lossless_override {
        findings.push(LintFinding {
            code: "LOSSLESS",
            error: false,
            message: "lossless_override is active; elements exceed the passive budget".into(),
        });
    }

    // anything the direct checks above missed (zero elements, bad angles,
    // nonpositive budget entries, ...) surfaces as a generic schema error
    if findings.iter().all(|f| !f.error) {
        if let Err(e) = doc.surface_config() {
            findings.push(LintFinding {
                code: "SCHEMA",
                error: true,
                message: e,
            });
        } else if let Err(e) = doc.outage_scenario(Side::Transmit) {
            findings.push(LintFinding {
                code: "SCHEMA",
                error: true,
                message: e,
            });
        }
    }

    if let Ok(aperture) = doc.aperture() {
        let boundary = field_boundary(&aperture);
        let cut_max_m = doc.run.cut.max_wavelengths * doc.aperture.wavelength_m;
        if cut_max_m < boundary {
            findings.push(LintFinding {
                code: "NEARFIELD",
                error: false,
                message: format!(
                    "gain cut ends at {cut_max_m} m, inside the field boundary {boundary} m; \
                     the far-field column is extrapolated there"
                ),
            });
        }
        if doc.run.grid.z_max_m < boundary {
            findings.push(LintFinding {
                code: "NEARFIELD",
                error: false,
                message: format!(
                    "coverage grid ends at z = {} m, inside the field boundary {boundary} m; \
                     beam peaks cannot be extracted beyond it",
                    doc.run.grid.z_max_m
                ),
            });
        }
    }

    // expected outage events at the deepest sweep point; an empty Monte
    // Carlo tail is not an error, but worth flagging up front
    if findings.iter().all(|f| !f.error) {
        let mut worst: Option<f64> = None;
        for group in [Side::Transmit, Side::Reflect] {
            if let (Ok(scenario), Ok(sweep)) = (doc.outage_scenario(group), doc.sweep_db()) {
                let gamma_t = 10f64.powf(sweep.last().copied().unwrap_or(0.0) / 10.0);
                if let Ok(p) = asymptotic_outage(&scenario, gamma_t) {
                    let events = p.min(1.0) * doc.run.max_trials as f64;
                    worst = Some(worst.map_or(events, |w: f64| w.min(events)));
                }
            }
        }
        if let Some(events) = worst {
            if events < 10.0 {
                findings.push(LintFinding {
                    code: "TRIALS",
                    error: false,
                    message: format!(
                        "about {events:.1} outage events expected at the deepest sweep point \
                         under the {} trial cap; Monte Carlo cells will be empty there",
                        doc.run.max_trials
                    ),
                });
            }
        }
    }

    findings
}

pub fn cmd_validate(doc: &ScenarioDocument) -> i32 {
    let findings = lint(doc);
    if findings.is_empty() {
        println!("scenario valid");
        return 0;
    }
    let mut has_error = false;
    for f in &findings {
        let level = if f.error { "error" } else { "warning" };
        has_error |= f.error;
        println!("{} {level}: {}", f.code, f.message);
    }
    if has_error {
        2
    } else {
        1
    }
}

pub fn cmd_boundary(doc: &ScenarioDocument) -> Result<(), Failure> {
    let aperture = doc.aperture().map_err(schema)?;
    println!("field boundary: {} m", fmt_float(field_boundary(&aperture)));
    Ok(())
}
