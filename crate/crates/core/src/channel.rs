//! Links between a transmitter, the surface and receivers.
//!
//! Two gain models live here. The far-field model treats the surface as a
//! point: a cascaded sum over per-element coefficients times a power-law
//! path loss on the two hop distances. The near-field model integrates a
//! uniform aperture distribution element by element, keeping each element's
//! own distance, spherical spreading and obliquity (leaning) factor, so it
//! stays finite arbitrarily close to the surface. Ricean small-scale fading
//! and the near/far field-region boundary round out the module.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::geometry::{Side, Vec3};
use crate::surface::{Aperture, SurfaceConfig};

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("link distance must be strictly positive")]
    NonPositiveDistance,
    #[error(
        "receiver is {distance} m from an element center, below the \
         near-field validity floor {min_distance} m"
    )]
    TooCloseToSurface { distance: f64, min_distance: f64 },
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: &'static str },
}

/// Ricean fading law R(K, Omega): line-of-sight power fraction K/(K+1) on
/// top of a circularly symmetric diffuse part, normalized so that sampled
/// magnitudes x satisfy E[x^2] = Omega.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiceanParams {
    k_factor: f64,
    omega: f64,
}

impl RiceanParams {
    pub fn new(k_factor: f64, omega: f64) -> Result<Self, ChannelError> {
        if !k_factor.is_finite() || k_factor < 0.0 {
            return Err(ChannelError::InvalidParameter {
                reason: "Ricean K factor must be finite and nonnegative",
            });
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(ChannelError::InvalidParameter {
                reason: "Ricean mean-square magnitude must be finite and positive",
            });
        }
        Ok(RiceanParams { k_factor, omega })
    }

    #[must_use]
    pub fn k_factor(&self) -> f64 {
        self.k_factor
    }

    #[must_use]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Deterministic line-of-sight amplitude nu = sqrt(K Omega / (K+1)).
    #[must_use]
    pub fn los_amplitude(&self) -> f64 {
        (self.k_factor * self.omega / (self.k_factor + 1.0)).sqrt()
    }

    /// Per-quadrature diffuse standard deviation sigma, with
    /// 2 sigma^2 = Omega / (K+1) so that E[x^2] = Omega exactly.
    #[must_use]
    pub fn diffuse_sigma(&self) -> f64 {
        (self.omega / (2.0 * (self.k_factor + 1.0))).sqrt()
    }
}

/// One complex fading sample; the magnitude follows the Ricean law of
/// `params` (small-x density slope 2(K+1)/Omega * e^{-K}).
pub fn sample_ricean<R: Rng + ?Sized>(params: &RiceanParams, rng: &mut R) -> Complex<f64> {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let sigma = params.diffuse_sigma();
    Complex::new(params.los_amplitude() + sigma * z1, sigma * z2)
}

/// Transmitter and receiver positions relative to the surface center at the
/// origin, with the two hop distances and the receiver's group derived.
///
/// The transmitter sits strictly on the reflection side (z < 0); receivers
/// share its half-space in mode R and use the opposite one in mode T.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    tx_position: Vec3,
    rx_position: Vec3,
    tx_distance: f64,
    rx_distance: f64,
    side: Side,
}

impl LinkGeometry {
    pub fn new(tx_position: Vec3, rx_position: Vec3) -> Result<Self, ChannelError> {
        if !(tx_position.z < 0.0) {
            return Err(ChannelError::InvalidParameter {
                reason: "transmitter must sit strictly on the reflection side (z < 0)",
            });
        }
        let tx_distance = tx_position.norm();
        let rx_distance = rx_position.norm();
        if !(tx_distance > 0.0) || !(rx_distance > 0.0) {
            return Err(ChannelError::NonPositiveDistance);
        }
        Ok(LinkGeometry {
            tx_position,
            rx_position,
            tx_distance,
            rx_distance,
            side: Side::of_point(rx_position),
        })
    }

    #[must_use]
    pub fn tx_position(&self) -> Vec3 {
        self.tx_position
    }

    #[must_use]
    pub fn rx_position(&self) -> Vec3 {
        self.rx_position
    }

    /// Transmitter to surface-center distance d0.
    #[must_use]
    pub fn tx_distance(&self) -> f64 {
        self.tx_distance
    }

    /// Surface-center to receiver distance.
    #[must_use]
    pub fn rx_distance(&self) -> f64 {
        self.rx_distance
    }

    /// Group implied by the receiver's half-space.
    #[must_use]
    pub fn side(&self) -> Side {
        self.side
    }
}

/// Power-law path loss: gain C0 * d_rx^-alpha_side * d_tx^-alpha_direct.
///
/// C0 is a dimensionless reference multiplier; the default 1 reports gains
/// in natural units where both hops have unit loss at 1 m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLossModel {
    pub exponent_direct: f64,
    pub exponent_transmit: f64,
    pub exponent_reflect: f64,
    pub reference_gain: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        PathLossModel {
            exponent_direct: 2.0,
            exponent_transmit: 2.0,
            exponent_reflect: 2.0,
            reference_gain: 1.0,
        }
    }
}

impl PathLossModel {
    #[must_use]
    pub fn exponent(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.exponent_transmit,
            Side::Reflect => self.exponent_reflect,
        }
    }

    fn validate(&self) -> Result<(), ChannelError> {
        let all = [
            self.exponent_direct,
            self.exponent_transmit,
            self.exponent_reflect,
        ];
        if all.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(ChannelError::InvalidParameter {
                reason: "path loss exponents must be finite and nonnegative",
            });
        }
        if !self.reference_gain.is_finite() || self.reference_gain <= 0.0 {
            return Err(ChannelError::InvalidParameter {
                reason: "reference gain must be finite and positive",
            });
        }
        Ok(())
    }
}

/// Cascaded coefficient r^H diag(Phi) h = sum_m conj(r_m) Phi_m h_m.
pub fn cascaded_channel(
    r_vec: &[Complex<f64>],
    phi_diag: &[Complex<f64>],
    h_vec: &[Complex<f64>],
) -> Result<Complex<f64>, ChannelError> {
    if phi_diag.len() != r_vec.len() {
        return Err(ChannelError::LengthMismatch {
            expected: r_vec.len(),
            got: phi_diag.len(),
        });
    }
    if h_vec.len() != r_vec.len() {
        return Err(ChannelError::LengthMismatch {
            expected: r_vec.len(),
            got: h_vec.len(),
        });
    }
    Ok(r_vec
        .iter()
        .zip(phi_diag)
        .zip(h_vec)
        .map(|((r, phi), h)| r.conj() * phi * h)
        .sum())
}

/// Far-field gain for one receiver group: the cascaded small-scale sum
/// scaled by power-law losses on both hops,
/// |g| = C0 * d_rx^-alpha * d_tx^-alpha0 * |r^H diag(Phi) h|.
///
/// Receivers inside the field boundary are not rejected: the point-surface
/// approximation simply stops being meaningful there (the gain grows without
/// bound as d_rx -> 0), and callers compare against [`field_boundary`].
pub fn far_field_gain(
    geometry: &LinkGeometry,
    path_loss: &PathLossModel,
    smallscale_r: &[Complex<f64>],
    smallscale_h: &[Complex<f64>],
    config: &SurfaceConfig,
    side: Side,
) -> Result<f64, ChannelError> {
    path_loss.validate()?;
    let m = config.elements().len();
    if smallscale_r.len() != m {
        return Err(ChannelError::LengthMismatch {
            expected: m,
            got: smallscale_r.len(),
        });
    }
    let phi = config.transfer_diagonal(side);
    let sum = cascaded_channel(smallscale_r, &phi, smallscale_h)?;
    let loss = geometry.rx_distance().powf(-path_loss.exponent(side))
        * geometry.tx_distance().powf(-path_loss.exponent_direct);
    Ok(path_loss.reference_gain * loss * sum.norm())
}

/// Obliquity factor F(theta) = (1 + cos theta) / 2 of an aperture element
/// seen at angle theta from its normal; 1 broadside, 1/2 edge-on.
#[must_use]
pub fn leaning_factor(theta: f64) -> f64 {
    (1.0 + theta.cos()) / 2.0
}

/// Incident field at the surface produced by the transmitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IncidentField {
    /// Ideal spherical wavefront from a point source: per-element
    /// coefficient e^{j 2 pi d / lambda} / d with d the source-element
    /// distance.
    Spherical { tx_position: Vec3 },
    /// Unit-amplitude plane wave propagating along `direction`.
    Plane { direction: Vec3 },
}

impl IncidentField {
    /// Per-element complex coefficients h_m over the aperture.
    pub fn coefficients(&self, aperture: &Aperture) -> Result<Vec<Complex<f64>>, ChannelError> {
        match *self {
            IncidentField::Spherical { tx_position } => aperture
                .positions()
                .iter()
                .map(|p| {
                    let d = tx_position.distance(*p);
                    if !(d > 0.0) {
                        return Err(ChannelError::NonPositiveDistance);
                    }
                    Ok(Complex::from_polar(1.0 / d, TAU * d / aperture.wavelength()))
                })
                .collect(),
            IncidentField::Plane { direction } => steering_vector(aperture, direction),
        }
    }
}

/// Unit-amplitude phase profile of a plane wave along `direction`:
/// entry m is e^{j 2 pi (u . p_m) / lambda} for unit u.
pub fn steering_vector(
    aperture: &Aperture,
    direction: Vec3,
) -> Result<Vec<Complex<f64>>, ChannelError> {
    if !(direction.norm() > 0.0) || !direction.norm().is_finite() {
        return Err(ChannelError::InvalidParameter {
            reason: "steering direction must be a nonzero finite vector",
        });
    }
    let u = direction.normalized();
    Ok(aperture
        .positions()
        .iter()
        .map(|p| Complex::from_polar(1.0, TAU * u.dot(*p) / aperture.wavelength()))
        .collect())
}

/// Unit-amplitude spherical phase profile from a point source: entry m is
/// e^{j 2 pi dist(source, p_m) / lambda}. The far-field small-scale vector
/// of an ideal line-of-sight hop, with the amplitude carried by path loss.
pub fn los_phase_vector(
    aperture: &Aperture,
    source: Vec3,
) -> Result<Vec<Complex<f64>>, ChannelError> {
    aperture
        .positions()
        .iter()
        .map(|p| {
            let d = source.distance(*p);
            if !(d > 0.0) {
                return Err(ChannelError::NonPositiveDistance);
            }
            Ok(Complex::from_polar(1.0, TAU * d / aperture.wavelength()))
        })
        .collect()
}

/// Aperture-integral channel that stays valid near the surface:
/// g = (A_e / (j lambda)) * sum_m Phi_m h_m F(theta_m)
///     * e^{j 2 pi d_m / lambda} / d_m
/// with per-element receiver distance d_m and obliquity angle theta_m
/// measured from the surface normal on `side` (+z transmit, -z reflect).
/// `include_leaning = false` replaces F by 1 for comparison runs.
pub fn near_field_channel(
    config: &SurfaceConfig,
    incident_h: &[Complex<f64>],
    rx_point: Vec3,
    side: Side,
    include_leaning: bool,
) -> Result<Complex<f64>, ChannelError> {
    // Validity floor: a tenth of the element pitch keeps the discrete sum a
    // sane stand-in for the continuous aperture integral.
    let min_distance = config.aperture().spacing() / 10.0;
    near_field_channel_with_min_distance(
        config,
        incident_h,
        rx_point,
        side,
        include_leaning,
        min_distance,
    )
}

pub fn near_field_channel_with_min_distance(
    config: &SurfaceConfig,
    incident_h: &[Complex<f64>],
    rx_point: Vec3,
    side: Side,
    include_leaning: bool,
    min_distance: f64,
) -> Result<Complex<f64>, ChannelError> {
    let aperture = config.aperture();
    let positions = aperture.positions();
    if incident_h.len() != positions.len() {
        return Err(ChannelError::LengthMismatch {
            expected: positions.len(),
            got: incident_h.len(),
        });
    }
    if !(min_distance >= 0.0) {
        return Err(ChannelError::InvalidParameter {
            reason: "minimum distance must be nonnegative",
        });
    }
    let normal = side.normal();
    let wavelength = aperture.wavelength();
    let mut sum = Complex::new(0.0, 0.0);
    for ((pos, h), element) in positions.iter().zip(incident_h).zip(config.elements()) {
        let v = rx_point - *pos;
        let d = v.norm();
        if d < min_distance {
            return Err(ChannelError::TooCloseToSurface {
                distance: d,
                min_distance,
            });
        }
        // (1 + cos theta)/2 without the acos round-trip of leaning_factor.
        let lean = if include_leaning {
            (1.0 + v.dot(normal) / d) / 2.0
        } else {
            1.0
        };
        sum += element.coefficient(side) * h * lean
            * Complex::from_polar(1.0 / d, TAU * d / wavelength);
    }
    // Aperture-integral prefactor A_e / (j lambda) = -j A_e / lambda.
    Ok(Complex::new(0.0, -aperture.element_area() / wavelength) * sum)
}

/// Rectangular observation window in the x-z plane (y = 0), sampled on a
/// uniform grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneSpec {
    x_min: f64,
    x_max: f64,
    z_min: f64,
    z_max: f64,
    x_count: usize,
    z_count: usize,
}

impl PlaneSpec {
    pub fn new(
        x_range: (f64, f64),
        z_range: (f64, f64),
        x_count: usize,
        z_count: usize,
    ) -> Result<Self, ChannelError> {
        for &(lo, hi) in [&x_range, &z_range] {
            if !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(ChannelError::InvalidParameter {
                    reason: "plane extents must be finite with max >= min",
                });
            }
        }
        if x_count == 0 || z_count == 0 {
            return Err(ChannelError::InvalidParameter {
                reason: "plane resolution must be at least 1 x 1",
            });
        }
        Ok(PlaneSpec {
            x_min: x_range.0,
            x_max: x_range.1,
            z_min: z_range.0,
            z_max: z_range.1,
            x_count,
            z_count,
        })
    }

    #[must_use]
    pub fn x_coords(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.x_count)
    }

    #[must_use]
    pub fn z_coords(&self) -> Vec<f64> {
        linspace(self.z_min, self.z_max, self.z_count)
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (count as f64 - 1.0);
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Gains sampled over a [`PlaneSpec`]: `values[iz * xs.len() + ix]` is the
/// gain at (xs[ix], 0, zs[iz]).
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageGrid {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub values: Vec<f64>,
}

impl CoverageGrid {
    #[must_use]
    pub fn value(&self, iz: usize, ix: usize) -> f64 {
        self.values[iz * self.xs.len() + ix]
    }
}

/// |g| of [`near_field_channel`] at every grid point of the plane.
///
/// Rows parallelize across a rayon pool; the ordered collect keeps the
/// output identical for any worker count.
pub fn coverage_map(
    config: &SurfaceConfig,
    incident_h: &[Complex<f64>],
    plane: &PlaneSpec,
    side: Side,
    include_leaning: bool,
) -> Result<CoverageGrid, ChannelError> {
    let xs = plane.x_coords();
    let zs = plane.z_coords();
    let rows: Vec<Vec<f64>> = zs
        .par_iter()
        .map(|&z| {
            xs.iter()
                .map(|&x| {
                    near_field_channel(config, incident_h, Vec3::new(x, 0.0, z), side, include_leaning)
                        .map(|g| g.norm())
                })
                .collect::<Result<Vec<f64>, ChannelError>>()
        })
        .collect::<Result<Vec<_>, ChannelError>>()?;
    Ok(CoverageGrid {
        xs,
        zs,
        values: rows.concat(),
    })
}

/// Near/far boundary 2 L_a^2 / lambda of the aperture.
#[must_use]
pub fn field_boundary(aperture: &Aperture) -> f64 {
    let la = aperture.largest_dimension();
    2.0 * la * la / aperture.wavelength()
}
