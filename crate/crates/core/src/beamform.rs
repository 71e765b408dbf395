//! Phase design for beam steering and peak extraction from coverage maps.
//!
//! The cophase rule equalizes every element's total path phase toward a
//! target far-field direction, assuming the spherical incident wave the
//! channel module uses by default. One subtlety is baked in here: the
//! near-field sum multiplies unconjugated element terms while the far-field
//! cascade conjugates its receive-side steering vector, and the two sign
//! flips cancel, so a single phase vector cophases both models.

use std::f64::consts::{PI, TAU};
use thiserror::Error;

use crate::channel::CoverageGrid;
use crate::geometry::{wrap_phase, Side, Vec3};
use crate::surface::Aperture;

/// Default angular bin width used by [`beam_peak`]: 0.5 degrees, well under
/// the 2 degree steering tolerance the beam validation cares about.
pub const DEFAULT_PEAK_BIN_WIDTH: f64 = 0.5 * PI / 180.0;

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum BeamformError {
    #[error("no grid cell lies beyond the requested minimum radius")]
    EmptyRegion,
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: &'static str },
}

/// Steering targets for both groups: polar angles measured from the surface
/// normal on each side, in a common azimuth plane (0 = the x-z plane).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteeringSpec {
    target_angle_transmit: f64,
    target_angle_reflect: f64,
    azimuth: f64,
    tx_position: Vec3,
}

impl SteeringSpec {
    pub fn new(
        target_angle_transmit: f64,
        target_angle_reflect: f64,
        azimuth: f64,
        tx_position: Vec3,
    ) -> Result<Self, BeamformError> {
        for angle in [target_angle_transmit, target_angle_reflect] {
            if !angle.is_finite() || !(0.0..PI / 2.0).contains(&angle) {
                return Err(BeamformError::InvalidParameter {
                    reason: "target angles must lie in [0, pi/2)",
                });
            }
        }
        if !azimuth.is_finite() {
            return Err(BeamformError::InvalidParameter {
                reason: "azimuth must be finite",
            });
        }
        Ok(SteeringSpec {
            target_angle_transmit,
            target_angle_reflect,
            azimuth,
            tx_position,
        })
    }

    #[must_use]
    pub fn target_angle(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.target_angle_transmit,
            Side::Reflect => self.target_angle_reflect,
        }
    }

    #[must_use]
    pub fn tx_position(&self) -> Vec3 {
        self.tx_position
    }

    /// Unit vector pointing from the surface center toward the target on
    /// `side` (into the +z half-space for transmit, -z for reflect).
    #[must_use]
    pub fn target_direction(&self, side: Side) -> Vec3 {
        let theta = self.target_angle(side);
        let (sin_t, cos_t) = theta.sin_cos();
        Vec3::new(
            sin_t * self.azimuth.cos(),
            sin_t * self.azimuth.sin(),
            match side {
                Side::Transmit => cos_t,
                Side::Reflect => -cos_t,
            },
        )
    }

    /// Cophase phases steering `side`'s beam at its target angle.
    pub fn phases(&self, aperture: &Aperture, side: Side) -> Result<Vec<f64>, BeamformError> {
        cophase_phases(aperture, self.tx_position, self.target_direction(side))
    }
}

/// Per-element phases that align all element contributions in the far-field
/// direction of `target` (a direction vector from the surface center; only
/// its direction matters):
///
///   phi_m = mod(-2 pi / lambda * (dist(tx, p_m) - p_m . u_target), 2 pi)
///
/// The first term cancels the spherical incident phase, the second the
/// relative path advance toward the target, so every element's total phase
/// in that direction is the common constant 2 pi D / lambda.
pub fn cophase_phases(
    aperture: &Aperture,
    tx_position: Vec3,
    target: Vec3,
) -> Result<Vec<f64>, BeamformError> {
    if !(target.norm() > 0.0) || !target.norm().is_finite() {
        return Err(BeamformError::InvalidParameter {
            reason: "target direction must be a nonzero finite vector",
        });
    }
    let u = target.normalized();
    let wavelength = aperture.wavelength();
    Ok(aperture
        .positions()
        .iter()
        .map(|p| wrap_phase(-TAU / wavelength * (tx_position.distance(*p) - p.dot(u))))
        .collect())
}

/// Direction and strength of the strongest ray in a coverage map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamPeak {
    /// Signed angle from the side normal, radians: the center of the winning
    /// angular bin. Positive toward +x.
    pub angle: f64,
    /// Largest gain observed in that bin.
    pub gain: f64,
}

/// Locates the beam direction in `grid` with the default 0.5 degree bins.
pub fn beam_peak(grid: &CoverageGrid, min_radius: f64) -> Result<BeamPeak, BeamformError> {
    beam_peak_with_bin(grid, min_radius, DEFAULT_PEAK_BIN_WIDTH)
}

/// Bins grid cells beyond `min_radius` by their signed angle from the side
/// normal (atan2(x, |z|), so both half-spaces use their own outward normal)
/// and returns the center of the bin holding the largest cell gain. Ties
/// break toward the smaller angle: bins scan in ascending order and only a
/// strictly larger gain displaces the incumbent.
pub fn beam_peak_with_bin(
    grid: &CoverageGrid,
    min_radius: f64,
    bin_width: f64,
) -> Result<BeamPeak, BeamformError> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(BeamformError::InvalidParameter {
            reason: "bin width must be positive and finite",
        });
    }
    if !(min_radius >= 0.0) {
        return Err(BeamformError::InvalidParameter {
            reason: "minimum radius must be nonnegative",
        });
    }
    let bins = ((PI / bin_width).ceil() as usize).max(1);
    let mut best: Vec<f64> = vec![f64::NEG_INFINITY; bins];
    let mut any = false;
    for (iz, &z) in grid.zs.iter().enumerate() {
        for (ix, &x) in grid.xs.iter().enumerate() {
            if x.hypot(z) < min_radius {
                continue;
            }
            any = true;
            let angle = x.atan2(z.abs());
            let idx = (((angle + PI / 2.0) / bin_width) as usize).min(bins - 1);
            let v = grid.value(iz, ix);
            if v > best[idx] {
                best[idx] = v;
            }
        }
    }
    if !any {
        return Err(BeamformError::EmptyRegion);
    }
    let mut winner = 0;
    for (idx, &gain) in best.iter().enumerate() {
        if gain > best[winner] {
            winner = idx;
        }
    }
    Ok(BeamPeak {
        angle: -PI / 2.0 + (winner as f64 + 0.5) * bin_width,
        gain: best[winner],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        coverage_map, far_field_gain, los_phase_vector, near_field_channel, steering_vector,
        IncidentField, LinkGeometry, PathLossModel, PlaneSpec,
    };
    use crate::channel::field_boundary;
    use crate::surface::SurfaceConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    const WAVELENGTH: f64 = 0.125;

    fn grid_16x16() -> Aperture {
        Aperture::grid(16, 16, WAVELENGTH / 2.0, WAVELENGTH).unwrap()
    }

    // -- cophase phases ------------------------------------------------------

    #[test]
    fn single_element_phase_only_tracks_tx_path() {
        let aperture = Aperture::grid(1, 1, 0.0625, WAVELENGTH).unwrap();
        let tx = Vec3::new(0.3, 0.0, -1.7);
        let a = cophase_phases(&aperture, tx, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let b = cophase_phases(&aperture, tx, Vec3::new(0.7, 0.0, 0.4)).unwrap();
        // element sits at the origin, so p . u vanishes for every target
        assert!(approx_eq(a[0], b[0], 1e-12));
        assert!(approx_eq(
            a[0],
            wrap_phase(-TAU / WAVELENGTH * tx.norm()),
            1e-12
        ));
    }

    #[test]
    fn broadside_pair_gets_equal_phases() {
        let aperture = Aperture::grid(1, 2, 0.0625, WAVELENGTH).unwrap();
        // on-axis source: both element paths are congruent by symmetry
        let tx = Vec3::new(0.0, 0.0, -5.0);
        let phases = cophase_phases(&aperture, tx, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(approx_eq(phases[0], phases[1], 1e-12));
    }

    #[test]
    fn cophase_rejects_zero_direction() {
        let aperture = grid_16x16();
        assert!(cophase_phases(&aperture, Vec3::new(0.0, 0.0, -1.0), Vec3::ZERO).is_err());
    }

    #[test]
    fn steering_spec_validates_angles() {
        let tx = Vec3::new(0.0, 0.0, -1.0);
        assert!(SteeringSpec::new(0.1, 0.2, 0.0, tx).is_ok());
        assert!(SteeringSpec::new(-0.1, 0.2, 0.0, tx).is_err());
        assert!(SteeringSpec::new(0.1, PI / 2.0, 0.0, tx).is_err());
        let spec = SteeringSpec::new(0.3, 0.4, 0.0, tx).unwrap();
        let ut = spec.target_direction(Side::Transmit);
        let ur = spec.target_direction(Side::Reflect);
        assert!(ut.z > 0.0 && ur.z < 0.0);
        assert!(approx_eq(ut.norm(), 1.0, 1e-12));
        assert!(approx_eq(ut.x, 0.3f64.sin(), 1e-12));
    }

    // -- steering verified through the coverage map --------------------------

    #[test]
    fn cophased_coverage_peaks_land_on_targets() {
        let aperture = grid_16x16();
        let boundary = field_boundary(&aperture);
        let tx = Vec3::new(0.0, 0.0, -30.0 * WAVELENGTH);
        let spec = SteeringSpec::new(
            7.6f64.to_radians(),
            16.6f64.to_radians(),
            0.0,
            tx,
        )
        .unwrap();
        let t_phases = spec.phases(&aperture, Side::Transmit).unwrap();
        let r_phases = spec.phases(&aperture, Side::Reflect).unwrap();
        let config = SurfaceConfig::uniform_star_with_override(
            aperture, 1.0, 1.0, &t_phases, &r_phases, true,
        )
        .unwrap();
        let h = IncidentField::Spherical { tx_position: tx }
            .coefficients(config.aperture())
            .unwrap();
        for (side, z_sign, target_deg) in
            [(Side::Transmit, 1.0, 7.6), (Side::Reflect, -1.0, 16.6)]
        {
            let z_lo = z_sign * boundary;
            let z_hi = z_sign * 2.0 * boundary;
            let plane = PlaneSpec::new(
                (-0.3 * boundary, boundary),
                (z_lo.min(z_hi), z_lo.max(z_hi)),
                121,
                61,
            )
            .unwrap();
            let grid = coverage_map(&config, &h, &plane, side, true).unwrap();
            let peak = beam_peak(&grid, boundary).unwrap();
            let err_deg = (peak.angle.to_degrees() - target_deg).abs();
            assert!(
                err_deg <= 2.0,
                "{side:?} peak at {} deg, want {target_deg}",
                peak.angle.to_degrees()
            );
        }
    }

    #[test]
    fn steering_sweep_is_monotone() {
        let aperture = grid_16x16();
        let tx = Vec3::new(0.0, 0.0, -30.0 * WAVELENGTH);
        let radius = 3.0 * field_boundary(&aperture);
        let mut last_peak = f64::NEG_INFINITY;
        let mut first = 0.0;
        let mut final_peak = 0.0;
        for step in 0..=12 {
            let target_deg = 2.5 * step as f64; // 0 to 30 degrees
            let spec = SteeringSpec::new(target_deg.to_radians(), 0.0, 0.0, tx).unwrap();
            let phases = spec.phases(&aperture, Side::Transmit).unwrap();
            let config = SurfaceConfig::uniform_star_with_override(
                aperture.clone(),
                1.0,
                1.0,
                &phases,
                &phases,
                true,
            )
            .unwrap();
            let h = IncidentField::Spherical { tx_position: tx }
                .coefficients(config.aperture())
                .unwrap();
            let plane = PlaneSpec::new(
                (-0.15 * radius, 0.75 * radius),
                (0.9 * radius, 1.08 * radius),
                120,
                9,
            )
            .unwrap();
            let grid = coverage_map(&config, &h, &plane, Side::Transmit, true).unwrap();
            let peak = beam_peak(&grid, 0.85 * radius).unwrap().angle;
            assert!(
                peak >= last_peak - 1e-12,
                "peak regressed at target {target_deg} deg"
            );
            if step == 0 {
                first = peak;
            }
            final_peak = peak;
            last_peak = peak;
        }
        assert!(final_peak.to_degrees() > first.to_degrees() + 20.0);
    }

    // -- optimality and phase invariance --------------------------------------

    #[test]
    fn cophase_beats_random_phase_vectors_in_target_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (rows, cols) in [(1usize, 3usize), (2, 2), (4, 4)] {
            let m = rows * cols;
            let aperture = Aperture::grid(rows, cols, 0.0625, WAVELENGTH).unwrap();
            let tx = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-3.0..-1.0),
            );
            let theta: f64 = rng.random_range(0.0..1.2);
            let u = Vec3::new(theta.sin(), 0.0, theta.cos());
            let radius = 500.0;
            let geometry = LinkGeometry::new(tx, u * radius).unwrap();
            let r_far = steering_vector(&aperture, u).unwrap();
            let h_far = los_phase_vector(&aperture, tx).unwrap();
            let loss = PathLossModel::default();
            let gain_for = |phases: &[f64]| {
                let config = SurfaceConfig::uniform_star(
                    aperture.clone(),
                    1.0,
                    0.0,
                    phases,
                    &vec![0.0; m],
                )
                .unwrap();
                far_field_gain(&geometry, &loss, &r_far, &h_far, &config, Side::Transmit)
                    .unwrap()
            };
            let cophased = gain_for(&cophase_phases(&aperture, tx, u).unwrap());
            for _ in 0..100 {
                let random: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..TAU)).collect();
                assert!(gain_for(&random) <= cophased + 1e-12 * cophased);
            }
        }
    }

    #[test]
    fn global_phase_offset_leaves_magnitudes_unchanged() {
        let aperture = Aperture::grid(3, 3, 0.0625, WAVELENGTH).unwrap();
        let tx = Vec3::new(0.2, 0.0, -1.0);
        let u = Vec3::new(0.3, 0.0, 0.95);
        let phases = cophase_phases(&aperture, tx, u).unwrap();
        let shifted: Vec<f64> = phases.iter().map(|p| p + 1.234).collect();
        let h = IncidentField::Spherical { tx_position: tx }
            .coefficients(&aperture)
            .unwrap();
        let rx = Vec3::new(3.0, 0.0, 9.0);
        let build = |ph: &[f64]| {
            SurfaceConfig::uniform_star(aperture.clone(), 1.0, 0.0, ph, &vec![0.0; 9]).unwrap()
        };
        let base = near_field_channel(&build(&phases), &h, rx, Side::Transmit, true)
            .unwrap()
            .norm();
        let moved = near_field_channel(&build(&shifted), &h, rx, Side::Transmit, true)
            .unwrap()
            .norm();
        assert!(approx_eq(base, moved, 1e-12 * base));
    }

    // -- beam peak extraction -------------------------------------------------

    #[test]
    fn single_hot_cell_at_45_degrees() {
        let grid = CoverageGrid {
            xs: vec![0.5, 1.0],
            zs: vec![0.5, 1.0],
            values: vec![0.0, 0.0, 0.0, 3.0],
        };
        let peak = beam_peak(&grid, 0.0).unwrap();
        assert!(approx_eq(peak.gain, 3.0, 0.0));
        assert!((peak.angle.to_degrees() - 45.0).abs() <= 0.5);
    }

    #[test]
    fn reflect_side_grid_measures_from_its_own_normal() {
        // cell at (x, z) = (1, -1) is 45 degrees off the -z normal
        let grid = CoverageGrid {
            xs: vec![0.0, 1.0],
            zs: vec![-1.0],
            values: vec![0.0, 2.0],
        };
        let peak = beam_peak(&grid, 0.5).unwrap();
        assert!((peak.angle.to_degrees() - 45.0).abs() <= 0.5);
    }

    #[test]
    fn uniform_grid_ties_break_to_smallest_angle() {
        let grid = CoverageGrid {
            xs: vec![-1.0, 0.0, 1.0],
            zs: vec![1.0],
            values: vec![1.0, 1.0, 1.0],
        };
        let peak = beam_peak(&grid, 0.0).unwrap();
        // cells sit at -45, 0, +45 degrees; the -45 bin is scanned first and
        // never displaced by an equal gain
        assert!((peak.angle.to_degrees() + 44.75).abs() <= 0.26);
    }

    #[test]
    fn empty_region_is_reported() {
        let grid = CoverageGrid {
            xs: vec![0.1],
            zs: vec![0.1],
            values: vec![1.0],
        };
        assert_eq!(
            beam_peak(&grid, 10.0).unwrap_err(),
            BeamformError::EmptyRegion
        );
        assert!(beam_peak_with_bin(&grid, 0.0, 0.0).is_err());
    }
}
