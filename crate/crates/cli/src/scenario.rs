//! Scenario document schema and resolution.
//!
//! Input files are TOML with the sections below; every key has a default,
//! unknown keys are rejected. Distances follow the conventions the studies
//! are usually quoted in: element spacing and gain-cut extents are in
//! wavelengths, everything else is meters. Angles in files are degrees.
//! The resolved form (what the JSON sidecar carries) is meters throughout
//! and has every default filled in, so a sidecar is enough to re-run a
//! command bit-exactly.

use serde::{Deserialize, Serialize};
use starris_core::analysis::{LinkBudget, OutageScenario, ScenarioSurface};
use starris_core::beamform::SteeringSpec;
use starris_core::channel::{IncidentField, PathLossModel, RiceanParams};
use starris_core::{Aperture, Side, SurfaceConfig, Vec3};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioDocument {
    pub aperture: ApertureSection,
    pub surface: SurfaceSection,
    pub steering: SteeringSection,
    pub pathloss: PathlossSection,
    pub fading: FadingSection,
    pub budget: BudgetSection,
    pub run: RunSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApertureSection {
    pub rows: usize,
    pub cols: usize,
    pub spacing_in_wavelengths: f64,
    pub wavelength_m: f64,
}

impl Default for ApertureSection {
    fn default() -> Self {
        ApertureSection {
            rows: 16,
            cols: 16,
            spacing_in_wavelengths: 0.5,
            wavelength_m: 0.125,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKindName {
    Star,
    Conventional,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSection {
    pub kind: SurfaceKindName,
    pub beta_t: f64,
    pub beta_r: f64,
    /// Partition sizes, used only by kind = "conventional"; they must sum
    /// to the aperture element count.
    pub m_t: usize,
    pub m_r: usize,
    pub lossless_override: bool,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        SurfaceSection {
            kind: SurfaceKindName::Star,
            beta_t: 0.5,
            beta_r: 0.5,
            m_t: 0,
            m_r: 0,
            lossless_override: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteeringSection {
    pub angle_t_deg: f64,
    pub angle_r_deg: f64,
    /// Transmitter position in meters; must sit on the z < 0 side.
    pub tx_position: [f64; 3],
}

impl Default for SteeringSection {
    fn default() -> Self {
        SteeringSection {
            angle_t_deg: 7.6,
            angle_r_deg: 16.6,
            tx_position: [0.0, 0.0, -3.75],
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathlossSection {
    pub alpha_0: f64,
    pub alpha_t: f64,
    pub alpha_r: f64,
    pub c0: f64,
}

impl Default for PathlossSection {
    fn default() -> Self {
        PathlossSection {
            alpha_0: 2.0,
            alpha_t: 2.0,
            alpha_r: 2.0,
            c0: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FadingSection {
    pub k_s: f64,
    pub omega_s: f64,
    pub k_d: f64,
    pub omega_d: f64,
}

impl Default for FadingSection {
    fn default() -> Self {
        FadingSection {
            k_s: 1.0,
            omega_s: 1.0,
            k_d: 1.0,
            omega_d: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub w_k: f64,
    pub sigma0_sq: f64,
    pub gamma_k: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection {
            w_k: 1.0,
            sigma0_sq: 1.0,
            gamma_k: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub trials: u64,
    pub max_trials: u64,
    pub gamma_t_sweep_db: SweepSection,
    pub grid: GridSection,
    pub cut: CutSection,
    pub include_leaning: bool,
    pub beta_in_pdf: bool,
    pub fit_mc_slope: bool,
    pub oracle_resolution: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            trials: 100_000,
            max_trials: 10_000_000,
            gamma_t_sweep_db: SweepSection::default(),
            grid: GridSection::default(),
            cut: CutSection::default(),
            include_leaning: true,
            beta_in_pdf: true,
            fit_mc_slope: false,
            oracle_resolution: 8192,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            start: 0.0,
            stop: 40.0,
            points: 17,
        }
    }
}

/// Coverage-plane extents in meters; z extents are magnitudes, applied at
/// +z for the transmit side and mirrored to -z for the reflect side.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
    pub x_count: usize,
    pub z_count: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            x_min_m: -20.0,
            x_max_m: 20.0,
            z_min_m: 1.0,
            z_max_m: 56.25,
            x_count: 200,
            z_count: 200,
        }
    }
}

/// Gain-cut line: |d| up to `max_wavelengths`, sampled at `points` evenly
/// spaced signed distances; negative d is the transmit side.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutSection {
    pub angle_deg: f64,
    pub max_wavelengths: f64,
    pub points: usize,
}

impl Default for CutSection {
    fn default() -> Self {
        CutSection {
            angle_deg: 60.0,
            max_wavelengths: 900.0,
            points: 240,
        }
    }
}

/// Everything in meters/radians-free display units with defaults filled,
/// serialized into the JSON sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedScenario {
    pub aperture: ResolvedAperture,
    pub surface: ResolvedSurface,
    pub steering: SteeringResolved,
    pub pathloss: PathlossSection,
    pub fading: FadingSection,
    pub budget: BudgetSection,
    pub run: ResolvedRun,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedAperture {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub wavelength_m: f64,
    pub element_area_m2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedSurface {
    pub kind: SurfaceKindName,
    pub beta_t: f64,
    pub beta_r: f64,
    pub m_t: usize,
    pub m_r: usize,
    pub lossless_override: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteeringResolved {
    pub angle_t_deg: f64,
    pub angle_r_deg: f64,
    pub tx_position_m: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedRun {
    pub seed: u64,
    pub trials: u64,
    pub max_trials: u64,
    pub gamma_t_sweep_db: SweepSection,
    pub grid_m: GridSection,
    pub cut: ResolvedCut,
    pub include_leaning: bool,
    pub beta_in_pdf: bool,
    pub fit_mc_slope: bool,
    pub oracle_resolution: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedCut {
    pub angle_deg: f64,
    pub max_m: f64,
    pub points: usize,
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("scenario schema: {e}"))
    }

    pub fn spacing_m(&self) -> f64 {
        self.aperture.spacing_in_wavelengths * self.aperture.wavelength_m
    }

    pub fn aperture(&self) -> Result<Aperture, String> {
        Aperture::grid(
            self.aperture.rows,
            self.aperture.cols,
            self.spacing_m(),
            self.aperture.wavelength_m,
        )
        .map_err(|e| format!("aperture: {e}"))
    }

    pub fn tx_position(&self) -> Vec3 {
        Vec3::from(self.steering.tx_position)
    }

    pub fn steering_spec(&self) -> Result<SteeringSpec, String> {
        SteeringSpec::new(
            self.steering.angle_t_deg.to_radians(),
            self.steering.angle_r_deg.to_radians(),
            0.0,
            self.tx_position(),
        )
        .map_err(|e| format!("steering: {e}"))
    }

    /// Cophased surface for the file's kind, split and steering targets.
    pub fn surface_config(&self) -> Result<SurfaceConfig, String> {
        let aperture = self.aperture()?;
        let spec = self.steering_spec()?;
        let t_phases = spec
            .phases(&aperture, Side::Transmit)
            .map_err(|e| format!("steering: {e}"))?;
        let r_phases = spec
            .phases(&aperture, Side::Reflect)
            .map_err(|e| format!("steering: {e}"))?;
        match self.surface.kind {
            SurfaceKindName::Star => SurfaceConfig::uniform_star_with_override(
                aperture,
                self.surface.beta_t,
                self.surface.beta_r,
                &t_phases,
                &r_phases,
                self.surface.lossless_override,
            ),
            SurfaceKindName::Conventional => SurfaceConfig::conventional(
                aperture,
                self.surface.m_t,
                self.surface.m_r,
                &t_phases,
                &r_phases,
            ),
        }
        .map_err(|e| format!("surface: {e}"))
    }

    pub fn incident_field(&self) -> IncidentField {
        IncidentField::Spherical {
            tx_position: self.tx_position(),
        }
    }

    pub fn path_loss(&self) -> PathLossModel {
        PathLossModel {
            exponent_direct: self.pathloss.alpha_0,
            exponent_transmit: self.pathloss.alpha_t,
            exponent_reflect: self.pathloss.alpha_r,
            reference_gain: self.pathloss.c0,
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudget, String> {
        // the budget's design gamma_t is never consumed by outage sweeps,
        // which substitute each sweep point explicitly
        LinkBudget::new(self.budget.w_k, self.budget.sigma0_sq, 1.0, self.budget.gamma_k)
            .map_err(|e| format!("budget: {e}"))
    }

    pub fn scenario_surface(&self) -> ScenarioSurface {
        match self.surface.kind {
            SurfaceKindName::Star => ScenarioSurface::Star {
                elements: self.aperture.rows * self.aperture.cols,
                beta_t: self.surface.beta_t,
                beta_r: self.surface.beta_r,
            },
            SurfaceKindName::Conventional => ScenarioSurface::Conventional {
                transmit_elements: self.surface.m_t,
                reflect_elements: self.surface.m_r,
            },
        }
    }

    pub fn outage_scenario(&self, group: Side) -> Result<OutageScenario, String> {
        let surface_fading = RiceanParams::new(self.fading.k_s, self.fading.omega_s)
            .map_err(|e| format!("fading: {e}"))?;
        let direct_fading = RiceanParams::new(self.fading.k_d, self.fading.omega_d)
            .map_err(|e| format!("fading: {e}"))?;
        OutageScenario::new(
            self.scenario_surface(),
            group,
            surface_fading,
            direct_fading,
            self.link_budget()?,
            self.run.beta_in_pdf,
            self.surface.lossless_override,
        )
        .map_err(|e| format!("outage scenario: {e}"))
    }

    /// Sweep points in dB, evenly spaced, ascending.
    pub fn sweep_db(&self) -> Result<Vec<f64>, String> {
        let sweep = &self.run.gamma_t_sweep_db;
        if sweep.points < 2 || !(sweep.stop > sweep.start) {
            return Err("run.gamma_t_sweep_db needs points >= 2 and stop > start".into());
        }
        let step = (sweep.stop - sweep.start) / (sweep.points - 1) as f64;
        Ok((0..sweep.points)
            .map(|i| sweep.start + step * i as f64)
            .collect())
    }

    pub fn resolved(&self, seed: u64) -> ResolvedScenario {
        ResolvedScenario {
            aperture: ResolvedAperture {
                rows: self.aperture.rows,
                cols: self.aperture.cols,
                spacing_m: self.spacing_m(),
                wavelength_m: self.aperture.wavelength_m,
                element_area_m2: self.spacing_m() * self.spacing_m(),
            },
            surface: ResolvedSurface {
                kind: self.surface.kind,
                beta_t: self.surface.beta_t,
                beta_r: self.surface.beta_r,
                m_t: self.surface.m_t,
                m_r: self.surface.m_r,
                lossless_override: self.surface.lossless_override,
            },
            steering: SteeringResolved {
                angle_t_deg: self.steering.angle_t_deg,
                angle_r_deg: self.steering.angle_r_deg,
                tx_position_m: self.steering.tx_position,
            },
            pathloss: self.pathloss.clone(),
            fading: self.fading.clone(),
            budget: self.budget.clone(),
            run: ResolvedRun {
                seed,
                trials: self.run.trials,
                max_trials: self.run.max_trials,
                gamma_t_sweep_db: self.run.gamma_t_sweep_db.clone(),
                grid_m: self.run.grid.clone(),
                cut: ResolvedCut {
                    angle_deg: self.run.cut.angle_deg,
                    max_m: self.run.cut.max_wavelengths * self.aperture.wavelength_m,
                    points: self.run.cut.points,
                },
                include_leaning: self.run.include_leaning,
                beta_in_pdf: self.run.beta_in_pdf,
                fit_mc_slope: self.run.fit_mc_slope,
                oracle_resolution: self.run.oracle_resolution,
            },
        }
    }
}
