//! Element coefficient model for a simultaneously transmitting and
//! reflecting surface.
//!
//! Each element m applies a transmission coefficient T_m = sqrt(beta_t) *
//! exp(j phi_t) and a reflection coefficient R_m = sqrt(beta_r) *
//! exp(j phi_r) to the field incident on it. Passive elements obey the
//! power cap |T_m|^2 + |R_m|^2 <= 1; an explicit lossless override exists
//! for idealized benchmarks that set both power fractions to 1.
//!
//! Coefficients can also be derived from an equivalent circuit description
//! (electric admittance Y_m, magnetic impedance Z_m) via
//! [`coefficients_from_impedance`].

use num_complex::Complex;
use thiserror::Error;

use crate::geometry::{wrap_phase, Side, Vec3};

/// Free-space wave impedance in ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.73;

/// Slack allowed on the passive power cap beta_t + beta_r <= 1.
pub const PASSIVITY_TOLERANCE: f64 = 1e-12;

/// Default denominator-magnitude floor below which the impedance mapping is
/// treated as degenerate.
pub const DEGENERACY_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("passivity violated: beta_t + beta_r = {sum:.17} exceeds 1")]
    PassivityViolation { sum: f64 },
    #[error("power fraction {value} outside [0, 1]")]
    PowerOutOfRange { value: f64 },
    #[error("degenerate impedance: denominator magnitude {magnitude:.3e} below {epsilon:.3e}")]
    DegenerateImpedance { magnitude: f64, epsilon: f64 },
    #[error("phase vector length {got} does not match element count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("partition mismatch: {transmit} transmit + {reflect} reflect elements != {total}")]
    PartitionMismatch {
        transmit: usize,
        reflect: usize,
        total: usize,
    },
    #[error("invalid aperture: {reason}")]
    InvalidAperture { reason: &'static str },
}

/// Per-element power fractions and phase shifts for both signal groups.
///
/// Invariants held by construction: both power fractions lie in [0, 1],
/// beta_t + beta_r <= 1 + [`PASSIVITY_TOLERANCE`] unless the element was
/// built with the lossless override, and phases are stored wrapped to
/// [0, 2*pi).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementCoefficients {
    beta_t: f64,
    phi_t: f64,
    beta_r: f64,
    phi_r: f64,
}

impl ElementCoefficients {
    /// Validating constructor for a passive element.
    pub fn new(beta_t: f64, phi_t: f64, beta_r: f64, phi_r: f64) -> Result<Self, SurfaceError> {
        Self::new_with_override(beta_t, phi_t, beta_r, phi_r, false)
    }

    /// Like [`ElementCoefficients::new`], but `lossless_override` skips the
    /// combined power cap. Individual fractions must still lie in [0, 1];
    /// the override exists for idealized configurations that radiate unit
    /// power into both half-spaces at once.
    pub fn new_with_override(
        beta_t: f64,
        phi_t: f64,
        beta_r: f64,
        phi_r: f64,
        lossless_override: bool,
    ) -> Result<Self, SurfaceError> {
        for value in [beta_t, beta_r] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(SurfaceError::PowerOutOfRange { value });
            }
        }
        let sum = beta_t + beta_r;
        if !lossless_override && sum > 1.0 + PASSIVITY_TOLERANCE {
            return Err(SurfaceError::PassivityViolation { sum });
        }
        Ok(ElementCoefficients {
            beta_t,
            phi_t: wrap_phase(phi_t),
            beta_r,
            phi_r: wrap_phase(phi_r),
        })
    }

    /// Builds an element from complex transmission/reflection coefficients,
    /// e.g. the output of [`coefficients_from_impedance`].
    pub fn from_complex(t: Complex<f64>, r: Complex<f64>) -> Result<Self, SurfaceError> {
        Self::new(t.norm_sqr(), t.arg(), r.norm_sqr(), r.arg())
    }

    #[must_use]
    pub fn beta(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.beta_t,
            Side::Reflect => self.beta_r,
        }
    }

    #[must_use]
    pub fn phase(&self, side: Side) -> f64 {
        match side {
            Side::Transmit => self.phi_t,
            Side::Reflect => self.phi_r,
        }
    }

    /// Complex coefficient sqrt(beta) * exp(j phi) applied to the group.
    #[must_use]
    pub fn coefficient(&self, side: Side) -> Complex<f64> {
        Complex::from_polar(self.beta(side).sqrt(), self.phase(side))
    }
}

/// Equivalent-circuit description of one element: parallel electric
/// admittance Y (siemens) and series magnetic impedance Z (ohms), with the
/// surrounding free-space impedance eta0 (ohms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceImpedance {
    pub electric_admittance: Complex<f64>,
    pub magnetic_impedance: Complex<f64>,
    pub free_space_impedance: f64,
}

impl SurfaceImpedance {
    #[must_use]
    pub fn new(electric_admittance: Complex<f64>, magnetic_impedance: Complex<f64>) -> Self {
        SurfaceImpedance {
            electric_admittance,
            magnetic_impedance,
            free_space_impedance: FREE_SPACE_IMPEDANCE,
        }
    }

    pub fn with_free_space_impedance(mut self, eta0: f64) -> Result<Self, SurfaceError> {
        if !(eta0 > 0.0) || !eta0.is_finite() {
            return Err(SurfaceError::InvalidAperture {
                reason: "free-space impedance must be positive and finite",
            });
        }
        self.free_space_impedance = eta0;
        Ok(self)
    }
}

/// Maps an equivalent circuit to the complex pair (T, R).
///
/// The two rational expressions are evaluated exactly as written:
///
/// ```text
/// R = -2 (eta0^2 Y - Z) / ((2 + eta0^2 Y) (2 eta0 + Z))
/// T = (2 - eta0 Y) / (2 + eta0 Y) - R
/// ```
///
/// Deliberate asymmetry: the transmission expression scales the admittance
/// by eta0 while the reflection expression scales it by eta0^2. Both forms
/// are kept verbatim; normalizing one to match the other would change the
/// mapping this crate promises.
pub fn coefficients_from_impedance(
    imp: &SurfaceImpedance,
) -> Result<(Complex<f64>, Complex<f64>), SurfaceError> {
    coefficients_from_impedance_with_epsilon(imp, DEGENERACY_EPSILON)
}

/// [`coefficients_from_impedance`] with a caller-chosen degeneracy floor.
pub fn coefficients_from_impedance_with_epsilon(
    imp: &SurfaceImpedance,
    epsilon: f64,
) -> Result<(Complex<f64>, Complex<f64>), SurfaceError> {
    let eta0 = imp.free_space_impedance;
    let y = imp.electric_admittance;
    let z = imp.magnetic_impedance;

    let den_r1 = Complex::new(2.0, 0.0) + y * (eta0 * eta0);
    let den_r2 = Complex::new(2.0 * eta0, 0.0) + z;
    let den_t = Complex::new(2.0, 0.0) + y * eta0;
    for den in [den_r1, den_r2, den_t] {
        let magnitude = den.norm();
        if magnitude < epsilon {
            return Err(SurfaceError::DegenerateImpedance { magnitude, epsilon });
        }
    }

    let r = (y * (eta0 * eta0) - z) * -2.0 / (den_r1 * den_r2);
    let t = (Complex::new(2.0, 0.0) - y * eta0) / den_t - r;
    Ok((t, r))
}

/// Planar rectangular element grid in the z = 0 plane.
///
/// Elements are ordered row-major: index m = row * cols + col, with the
/// column axis along x and the row axis along y, centered on the origin.
#[derive(Clone, Debug)]
pub struct Aperture {
    rows: usize,
    cols: usize,
    spacing: f64,
    wavelength: f64,
    element_area: f64,
    positions: Vec<Vec3>,
}

impl Aperture {
    /// Regular grid with the default effective element area spacing^2.
    pub fn grid(
        rows: usize,
        cols: usize,
        spacing: f64,
        wavelength: f64,
    ) -> Result<Self, SurfaceError> {
        Self::grid_with_element_area(rows, cols, spacing, wavelength, spacing * spacing)
    }

    pub fn grid_with_element_area(
        rows: usize,
        cols: usize,
        spacing: f64,
        wavelength: f64,
        element_area: f64,
    ) -> Result<Self, SurfaceError> {
        if rows == 0 || cols == 0 {
            return Err(SurfaceError::InvalidAperture {
                reason: "element grid must have at least one row and one column",
            });
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(SurfaceError::InvalidAperture {
                reason: "element spacing must be positive and finite",
            });
        }
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(SurfaceError::InvalidAperture {
                reason: "wavelength must be positive and finite",
            });
        }
        if !(element_area > 0.0) || !element_area.is_finite() {
            return Err(SurfaceError::InvalidAperture {
                reason: "element area must be positive and finite",
            });
        }
        let mut positions = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            for col in 0..cols {
                let x = (col as f64 - (cols as f64 - 1.0) / 2.0) * spacing;
                let y = (row as f64 - (rows as f64 - 1.0) / 2.0) * spacing;
                positions.push(Vec3::new(x, y, 0.0));
            }
        }
        Ok(Aperture {
            rows,
            cols,
            spacing,
            wavelength,
            element_area,
            positions,
        })
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false // construction requires at least one element
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[must_use]
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    #[must_use]
    pub fn element_area(&self) -> f64 {
        self.element_area
    }

    #[must_use]
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Largest dimension of the radiating region: the diagonal of the
    /// bounding rectangle of element centers, or the physical diagonal
    /// sqrt(2) * spacing for a single element whose center box degenerates
    /// to a point.
    #[must_use]
    pub fn largest_dimension(&self) -> f64 {
        if self.rows == 1 && self.cols == 1 {
            std::f64::consts::SQRT_2 * self.spacing
        } else {
            let w = (self.cols as f64 - 1.0) * self.spacing;
            let h = (self.rows as f64 - 1.0) * self.spacing;
            w.hypot(h)
        }
    }
}

/// Operating mode of the whole surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Every element serves both groups simultaneously.
    Star,
    /// Element-partitioned baseline: a fixed subset reflects, the rest
    /// transmits.
    Conventional {
        transmit_elements: usize,
        reflect_elements: usize,
    },
}

/// A fully configured surface: geometry plus per-element coefficients.
#[derive(Clone, Debug)]
pub struct SurfaceConfig {
    aperture: Aperture,
    elements: Vec<ElementCoefficients>,
    kind: SurfaceKind,
}

impl SurfaceConfig {
    /// Surface whose elements all share one power split (beta_t, beta_r),
    /// with per-element phases.
    pub fn uniform_star(
        aperture: Aperture,
        beta_t: f64,
        beta_r: f64,
        t_phases: &[f64],
        r_phases: &[f64],
    ) -> Result<Self, SurfaceError> {
        Self::uniform_star_with_override(aperture, beta_t, beta_r, t_phases, r_phases, false)
    }

    /// [`SurfaceConfig::uniform_star`] with the lossless override forwarded
    /// to every element.
    pub fn uniform_star_with_override(
        aperture: Aperture,
        beta_t: f64,
        beta_r: f64,
        t_phases: &[f64],
        r_phases: &[f64],
        lossless_override: bool,
    ) -> Result<Self, SurfaceError> {
        let m = aperture.len();
        for phases in [t_phases, r_phases] {
            if phases.len() != m {
                return Err(SurfaceError::LengthMismatch {
                    expected: m,
                    got: phases.len(),
                });
            }
        }
        let elements = (0..m)
            .map(|i| {
                ElementCoefficients::new_with_override(
                    beta_t,
                    t_phases[i],
                    beta_r,
                    r_phases[i],
                    lossless_override,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SurfaceConfig {
            aperture,
            elements,
            kind: SurfaceKind::Star,
        })
    }

    /// Element-partitioned baseline surface. The first `reflect_elements`
    /// entries reflect with unit power (beta_t = 0), the last
    /// `transmit_elements` transmit with unit power (beta_r = 0). Phase
    /// vectors cover the full aperture; entries belonging to the other
    /// group are retained but multiply a zero amplitude.
    pub fn conventional(
        aperture: Aperture,
        transmit_elements: usize,
        reflect_elements: usize,
        t_phases: &[f64],
        r_phases: &[f64],
    ) -> Result<Self, SurfaceError> {
        let m = aperture.len();
        if transmit_elements + reflect_elements != m {
            return Err(SurfaceError::PartitionMismatch {
                transmit: transmit_elements,
                reflect: reflect_elements,
                total: m,
            });
        }
        for phases in [t_phases, r_phases] {
            if phases.len() != m {
                return Err(SurfaceError::LengthMismatch {
                    expected: m,
                    got: phases.len(),
                });
            }
        }
        let elements = (0..m)
            .map(|i| {
                let (beta_t, beta_r) = if i < reflect_elements {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                };
                ElementCoefficients::new(beta_t, t_phases[i], beta_r, r_phases[i])
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SurfaceConfig {
            aperture,
            elements,
            kind: SurfaceKind::Conventional {
                transmit_elements,
                reflect_elements,
            },
        })
    }

    #[must_use]
    pub fn aperture(&self) -> &Aperture {
        &self.aperture
    }

    #[must_use]
    pub fn elements(&self) -> &[ElementCoefficients] {
        &self.elements
    }

    #[must_use]
    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Diagonal of the transfer matrix for one group: entry m is the
    /// complex coefficient element m applies to that group's signal.
    /// Elements with a zero power fraction contribute exact zeros.
    #[must_use]
    pub fn transfer_diagonal(&self, side: Side) -> Vec<Complex<f64>> {
        self.elements.iter().map(|e| e.coefficient(side)).collect()
    }
}
