use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::SimError;

/// The five measured distances of a roped quadrilateral course.
///
/// `BC` is not measured; it follows from the other five.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadLengths {
    pub ab: f64,
    pub cd: f64,
    pub ad: f64,
    pub bd: f64,
    pub ac: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertices {
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
    pub c: Vector2<f64>,
    pub d: Vector2<f64>,
}

impl Vertices {
    pub fn as_array(&self) -> [Vector2<f64>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn by_label(&self, label: &str) -> Option<Vector2<f64>> {
        match label.trim().to_ascii_uppercase().as_str() {
            "A" => Some(self.a),
            "B" => Some(self.b),
            "C" => Some(self.c),
            "D" => Some(self.d),
            _ => None,
        }
    }

    pub fn lengths(&self) -> QuadLengths {
        QuadLengths {
            ab: (self.b - self.a).norm(),
            cd: (self.d - self.c).norm(),
            ad: (self.d - self.a).norm(),
            bd: (self.d - self.b).norm(),
            ac: (self.c - self.a).norm(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        let [a, b, c, d] = self.as_array();
        (b - a).norm() + (c - b).norm() + (d - c).norm() + (a - d).norm()
    }
}

/// Places the course from its five measured distances.
///
/// A sits at the origin and B on the +x axis. D follows from triangle ABD
/// and C from triangle ACD, taking the intersection on B's side of line AD
/// so that A, B, C, D is a counterclockwise convex quadrilateral.
pub fn solve_quadrilateral(l: &QuadLengths) -> Result<Vertices, SimError> {
    let infeasible = |msg: &str| Err(SimError::InfeasibleQuadrilateral(msg.to_string()));
    if [l.ab, l.cd, l.ad, l.bd, l.ac]
        .iter()
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return infeasible("all lengths must be positive");
    }
    let a = Vector2::zeros();
    let b = Vector2::new(l.ab, 0.0);

    let dx = (l.ad * l.ad - l.bd * l.bd + l.ab * l.ab) / (2.0 * l.ab);
    let dy2 = l.ad * l.ad - dx * dx;
    if dy2 <= 0.0 {
        return infeasible("triangle ABD violates the triangle inequality");
    }
    let d = Vector2::new(dx, dy2.sqrt());

    let u = d / l.ad;
    let along = (l.ac * l.ac - l.cd * l.cd + l.ad * l.ad) / (2.0 * l.ad);
    let h2 = l.ac * l.ac - along * along;
    if h2 <= 0.0 {
        return infeasible("triangle ACD violates the triangle inequality");
    }
    // Right-hand normal of A->D; B lies on this side because B.y = 0 < D.y.
    let right = Vector2::new(u.y, -u.x);
    let c = u * along + right * h2.sqrt();
    if c.y <= 0.0 {
        return infeasible("vertex C falls outside the upper half-plane");
    }
    Ok(Vertices { a, b, c, d })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let s2 = 2f64.sqrt();
        let v = solve_quadrilateral(&QuadLengths {
            ab: 1.0,
            cd: 1.0,
            ad: 1.0,
            bd: s2,
            ac: s2,
        })
        .unwrap();
        assert!((v.b - Vector2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((v.c - Vector2::new(1.0, 1.0)).norm() < 1e-12);
        assert!((v.d - Vector2::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn infeasible_triangle() {
        let err = solve_quadrilateral(&QuadLengths {
            ab: 1.0,
            cd: 1.0,
            ad: 1.0,
            bd: 5.0,
            ac: 1.0,
        });
        assert!(matches!(err, Err(SimError::InfeasibleQuadrilateral(_))));
    }
}
