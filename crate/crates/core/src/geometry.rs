//! Planar geometry: points, circle and axis-aligned rectangle obstacles, and
//! closed-form segment intersection tests.
//!
//! All shapes are closed sets: a point on an obstacle boundary is inside it,
//! and a segment that grazes a boundary collides.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> From<[T; 2]> for Point<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Self { x, y }
    }
}

impl<T> From<Point<T>> for [T; 2] {
    fn from(p: Point<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Self, t: T) -> Self {
        Self {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }

    /// Hashable identity of the exact coordinates.
    pub fn key(&self) -> PointKey {
        PointKey(self.x.key_bits(), self.y.key_bits())
    }
}

impl<T: Serialize> Serialize for Point<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Point<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(T, T)>::deserialize(d)?;
        Ok(Self { x, y })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointKey(u64, u64);

/// Axis-aligned rectangle `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Point<T>, max: Point<T>) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > T::zero() && self.height() > T::zero())
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Closed segment vs closed box, by slab clipping.
    pub fn intersects_segment(&self, a: &Point<T>, b: &Point<T>) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let mut t0 = T::zero();
        let mut t1 = T::one();
        for (p, d, lo, hi) in [
            (a.x, b.x - a.x, self.min.x, self.max.x),
            (a.y, b.y - a.y, self.min.y, self.max.y),
        ] {
            if d == T::zero() {
                if p < lo || p > hi {
                    return false;
                }
                continue;
            }
            let (mut near, mut far) = ((lo - p) / d, (hi - p) / d);
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

impl<T: Scalar> Serialize for Aabb<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.min.x, self.min.y, self.max.x, self.max.y].serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Aabb<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x0, y0, x1, y1] = <[T; 4]>::deserialize(d)?;
        Ok(Self::new(Point::new(x0, y0), Point::new(x1, y1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Obstacle<T> {
    Circle {
        #[serde(rename = "c")]
        center: Point<T>,
        #[serde(rename = "r")]
        radius: T,
    },
    Rect {
        min: Point<T>,
        max: Point<T>,
    },
}

impl<T: Scalar> Obstacle<T> {
    pub fn contains(&self, p: &Point<T>) -> bool {
        match self {
            Obstacle::Circle { center, radius } => center.distance(p) <= *radius,
            Obstacle::Rect { min, max } => Aabb::new(*min, *max).contains(p),
        }
    }

    pub fn intersects_segment(&self, a: &Point<T>, b: &Point<T>) -> bool {
        match self {
            Obstacle::Circle { center, radius } => segment_point_distance(a, b, center) <= *radius,
            Obstacle::Rect { min, max } => Aabb::new(*min, *max).intersects_segment(a, b),
        }
    }
}

/// Euclidean distance from `p` to the closed segment `ab`.
pub fn segment_point_distance<T: Scalar>(a: &Point<T>, b: &Point<T>, p: &Point<T>) -> T {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == T::zero() {
        return a.distance(p);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2)
        .max(T::zero())
        .min(T::one());
    a.lerp(b, t).distance(p)
}
