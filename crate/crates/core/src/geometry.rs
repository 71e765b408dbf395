//! Small geometry helpers shared across the crate.
//!
//! The surface always lies in the z = 0 plane with its normal along +z.
//! Everything on the +z side of the surface belongs to the transmission
//! region, everything on the -z side to the reflection region.

use std::ops::{Add, Mul, Neg, Sub};

/// Cartesian point/vector in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[must_use]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[must_use]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[must_use]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Euclidean distance to `other`.
    #[must_use]
    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the direction of `self`. Zero-length input yields NaNs;
    /// callers validate lengths first.
    #[must_use]
    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

/// Which of the two signal groups an element coefficient, channel or receiver
/// belongs to: transmission (the +z half-space) or reflection (the -z
/// half-space, where the transmitter also sits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Transmit,
    Reflect,
}

impl Side {
    /// Outward surface normal seen by receivers on this side.
    #[must_use]
    pub fn normal(self) -> Vec3 {
        match self {
            Side::Transmit => Vec3::new(0.0, 0.0, 1.0),
            Side::Reflect => Vec3::new(0.0, 0.0, -1.0),
        }
    }

    /// Side of the surface a point belongs to. The z = 0 plane itself is
    /// grouped with the transmission side.
    #[must_use]
    pub fn of_point(p: Vec3) -> Side {
        if p.z < 0.0 {
            Side::Reflect
        } else {
            Side::Transmit
        }
    }
}

/// Wraps an angle to [0, 2*pi). Values that round up to exactly 2*pi map to 0.
#[must_use]
pub fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let p = phi.rem_euclid(tau);
    if p >= tau {
        0.0
    } else {
        p
    }
}
