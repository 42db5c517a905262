use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Point or vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// The vertical unit vector `e`.
    #[inline]
    pub fn up() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm2(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    /// Component of `self` orthogonal to the unit vector `n`.
    #[inline]
    pub fn reject(self, n: Self) -> Self {
        self - n * self.dot(n)
    }

    /// Great-circle distance between two unit vectors, stable for small and large angles.
    #[inline]
    pub fn angle_to(self, o: Self) -> T {
        self.cross(o).norm().atan2(self.dot(o))
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::from_f64(self.x.to_f64().unwrap()).unwrap(),
            U::from_f64(self.y.to_f64().unwrap()).unwrap(),
            U::from_f64(self.z.to_f64().unwrap()).unwrap(),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Area of the geodesic triangle with unit-vector corners, via the spherical excess
/// `tan(E/2) = |a·(b×c)| / (1 + a·b + b·c + c·a)`.
pub fn spherical_triangle_area<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> T {
    let num = a.dot(b.cross(c)).abs();
    let den = T::one() + a.dot(b) + b.dot(c) + c.dot(a);
    lit2::<T>() * num.atan2(den)
}

#[inline]
fn lit2<T: Real>() -> T {
    T::one() + T::one()
}

/// Orthonormal basis of the tangent plane at the unit vector `p`.
pub fn tangent_frame<T: Real>(p: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    // Pick the coordinate axis least aligned with p.
    let ax = if p.x.abs() <= p.y.abs() && p.x.abs() <= p.z.abs() {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else if p.y.abs() <= p.z.abs() {
        Vec3::new(T::zero(), T::one(), T::zero())
    } else {
        Vec3::new(T::zero(), T::zero(), T::one())
    };
    let e1 = ax.reject(p).normalized();
    let e2 = p.cross(e1);
    (e1, e2)
}

/// Riemannian log map on the unit sphere: tangent vector at `p` pointing to `q` with length
/// equal to their geodesic distance.
pub fn log_map<T: Real>(p: Vec3<T>, q: Vec3<T>) -> Vec3<T> {
    let t = q.reject(p);
    let s = t.norm();
    if s == T::zero() {
        return Vec3::zero();
    }
    t * (p.angle_to(q) / s)
}

/// Riemannian exponential map on the unit sphere.
pub fn exp_map<T: Real>(p: Vec3<T>, v: Vec3<T>) -> Vec3<T> {
    let r = v.norm();
    if r == T::zero() {
        return p;
    }
    (p * r.cos() + v * (r.sin() / r)).normalized()
}
