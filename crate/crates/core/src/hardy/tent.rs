//! Tent atoms and the stopping-time atomic decomposition of tent fields.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Result;
use crate::functionals::{t2_norm, tent_a, TentField};
use crate::graph::Vertex;
use crate::metric::{RhoTable, Space};
use crate::vecops::check_len;

/// A tent field supported in `hat B(center, radius)` with
/// `sum_{hat B} m(y)/k |a(y,k)|^2 <= 1 / V(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TentAtom {
    pub center: Vertex,
    pub radius: f64,
    pub volume: f64,
    pub values: TentField,
}

/// Outcome of [`check_tent_atom`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomCertificate {
    /// Every nonzero `(y,k)` satisfies `rho(y, B^c) >= k`.
    pub support_ok: bool,
    /// `sum m(y)/k |a(y,k)|^2`.
    pub mass: f64,
    /// `1 / V(B)`.
    pub bound: f64,
}

impl AtomCertificate {
    /// Support clause and size clause, the latter with `1e-10` relative slack.
    pub fn is_valid(&self) -> bool {
        self.support_ok && self.mass <= self.bound * (1.0 + 1e-10)
    }
}

pub fn check_tent_atom(space: &Space, table: &RhoTable, atom: &TentAtom) -> AtomCertificate {
    let m = space.measure();
    let row = table.row(atom.center);
    let outside: Vec<bool> = row.iter().map(|&v| v >= atom.radius).collect();
    let reach = table.distance_to_set(&outside);
    let volume: f64 = row
        .iter()
        .zip(m)
        .filter(|(&v, _)| v < atom.radius)
        .map(|(_, w)| w)
        .sum();
    let mut support_ok = true;
    let mut mass = 0.0;
    for (y, k, v) in atom.values.support() {
        if reach[y] < k as f64 {
            support_ok = false;
        }
        mass += m[y] / k as f64 * v * v;
    }
    AtomCertificate {
        support_ok,
        mass,
        bound: 1.0 / volume,
    }
}

/// `F = sum_j lambda_j a_j` with tent atoms `a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TentDecomposition {
    pub atoms: Vec<TentAtom>,
    pub coefficients: Vec<f64>,
    /// `||F - sum_j lambda_j a_j||_{T^2}`.
    pub residual: f64,
    pub input_t2: f64,
    /// `||F||_{T^1} = sum_x A F(x) m(x)`.
    pub input_t1: f64,
}

impl TentDecomposition {
    pub fn lambda_sum(&self) -> f64 {
        self.coefficients.iter().map(|l| l.abs()).sum()
    }

    /// `sum |lambda_j| / ||F||_{T^1}`.
    pub fn efficiency(&self) -> f64 {
        if self.input_t1 == 0.0 {
            0.0
        } else {
            self.lambda_sum() / self.input_t1
        }
    }

    pub fn reconstruct(&self) -> Option<TentField> {
        let first = self.atoms.first()?;
        let mut out = TentField::zeros(first.values.vertex_count(), first.values.k_max());
        for (atom, l) in self.atoms.iter().zip(&self.coefficients) {
            out.add_scaled(*l, &atom.values);
        }
        Some(out)
    }
}

/// Decomposes `field` into tent atoms.
///
/// Level sets `O_i = {A F > 2^i}` are formed on the dyadic range covering the
/// positive values of `A F`; the tent differences `hat O_i \ hat O_{i+1}`
/// partition the support of `F`. Each `O_i` is covered greedily by balls
/// `B(c, rho(c, O_i^c) / 2^{B+1})` taken in decreasing order of
/// `rho(c, O_i^c)`, a tent point `(y,k)` goes to the first ball containing
/// `y`, and each group becomes one atom on the smallest ball around that
/// center whose tent holds the group, rescaled to saturate the size bound.
pub fn tent_atomic_decompose(space: &Space, table: &RhoTable, field: &TentField) -> Result<TentDecomposition> {
    let n = space.vertex_count();
    check_len(n, field.vertex_count())?;
    let m = space.measure();
    let af = tent_a(space, field)?;
    let input_t1: f64 = af.iter().zip(m).map(|(a, w)| a * w).sum();
    let input_t2 = t2_norm(space, field)?;
    let positive = af.iter().copied().filter(|v| *v > 0.0);
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let mut out = TentDecomposition {
        atoms: Vec::new(),
        coefficients: Vec::new(),
        residual: 0.0,
        input_t2,
        input_t1,
    };
    if field.is_zero() || hi == 0.0 {
        out.residual = input_t2;
        return Ok(out);
    }
    let i_min = lo.log2().floor() as i32 - 1;
    let i_max = hi.log2().floor() as i32 + 1;
    let two_b1 = (space.bound() + 1.0).exp2();
    let diameter = table.max();

    // rho(y, O_i^c) for every y.
    let reach_of = |i: i32| -> Vec<f64> {
        let threshold = (i as f64).exp2();
        let outside: Vec<bool> = af.iter().map(|&a| !(a > threshold)).collect();
        table.distance_to_set(&outside)
    };
    let mut reach_next = reach_of(i_min);
    for i in i_min..=i_max {
        let reach = core::mem::replace(&mut reach_next, reach_of(i + 1));
        // Tent points in hat O_i \ hat O_{i+1}.
        let points: Vec<(Vertex, usize, f64)> = field
            .support()
            .filter(|&(y, k, _)| reach[y] >= k as f64 && reach_next[y] < k as f64)
            .collect();
        if points.is_empty() {
            continue;
        }
        let balls = cover(table, &reach, two_b1, diameter);
        let mut groups: Vec<Vec<(Vertex, usize, f64)>> = vec![Vec::new(); balls.len()];
        for &(y, k, v) in &points {
            let j = balls
                .iter()
                .position(|&(c, r)| table.get(c, y) < r)
                .expect("cover contains every point of O_i");
            groups[j].push((y, k, v));
        }
        for ((c, _), group) in balls.iter().zip(groups) {
            if group.is_empty() {
                continue;
            }
            out.push_atom(space, table, *c, &group, field);
        }
    }
    let mut residual_field = field.clone();
    if let Some(rec) = out.reconstruct() {
        residual_field.add_scaled(-1.0, &rec);
    }
    out.residual = t2_norm(space, &residual_field)?;
    Ok(out)
}

/// Greedy cover of `O = {reach > 0}` by `(center, radius)` balls.
fn cover(table: &RhoTable, reach: &[f64], two_b1: f64, diameter: f64) -> Vec<(Vertex, f64)> {
    let n = reach.len();
    if reach.iter().all(|r| r.is_infinite()) {
        return vec![(0, diameter + 1.0)];
    }
    let mut order: Vec<Vertex> = (0..n).filter(|&y| reach[y] > 0.0).collect();
    order.sort_by(|&a, &b| reach[b].total_cmp(&reach[a]).then(a.cmp(&b)));
    let mut covered = vec![false; n];
    let mut balls = Vec::new();
    for c in order {
        if covered[c] {
            continue;
        }
        let r = reach[c] / two_b1;
        for (y, flag) in covered.iter_mut().enumerate() {
            if table.get(c, y) < r {
                *flag = true;
            }
        }
        balls.push((c, r));
    }
    balls
}

impl TentDecomposition {
    fn push_atom(
        &mut self,
        space: &Space,
        table: &RhoTable,
        center: Vertex,
        group: &[(Vertex, usize, f64)],
        field: &TentField,
    ) {
        let m = space.measure();
        let row = table.row(center);
        // Farthest point, seen from the center, of any B(y,k) in the group.
        let mut reach_max = 0.0f64;
        let mut mass = 0.0;
        for &(y, k, v) in group {
            let ry = table.row(y);
            for (z, &d) in ry.iter().enumerate() {
                if d < k as f64 {
                    reach_max = reach_max.max(row[z]);
                }
            }
            mass += m[y] / k as f64 * v * v;
        }
        let radius = ball_radius_above(row, reach_max);
        let volume: f64 = row.iter().zip(m).filter(|(&d, _)| d < radius).map(|(_, w)| w).sum();
        let lambda = (volume * mass).sqrt();
        let mut values = TentField::zeros(field.vertex_count(), field.k_max());
        for &(y, k, v) in group {
            values.set(y, k, v / lambda);
        }
        self.atoms.push(TentAtom {
            center,
            radius,
            volume,
            values,
        });
        self.coefficients.push(lambda);
    }
}

/// Radius of the ball `{z : rho(c,z) <= reach}`: the integer
/// `floor(reach) + 1` when it selects the same set, otherwise the midpoint
/// to the next distance value.
fn ball_radius_above(row: &[f64], reach: f64) -> f64 {
    let candidate = reach.floor() + 1.0;
    let next = row
        .iter()
        .copied()
        .filter(|&d| d > reach)
        .fold(f64::INFINITY, f64::min);
    if next >= candidate {
        candidate
    } else {
        0.5 * (reach + next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build, BuilderSpec};

    #[test]
    fn zero_field_is_empty() {
        let s = build(&BuilderSpec::sierpinski(2)).unwrap();
        let table = s.rho_table();
        let d = tent_atomic_decompose(&s, &table, &TentField::zeros(s.vertex_count(), 4)).unwrap();
        assert!(d.atoms.is_empty());
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn single_point_field_gives_one_atom() {
        let s = build(&BuilderSpec::sierpinski(3)).unwrap();
        let table = s.rho_table();
        let mut field = TentField::zeros(s.vertex_count(), 8);
        field.set(5, 3, 2.0);
        let d = tent_atomic_decompose(&s, &table, &field).unwrap();
        assert_eq!(d.atoms.len(), 1);
        assert!(d.residual <= 1e-14);
        let cert = check_tent_atom(&s, &table, &d.atoms[0]);
        assert!(cert.is_valid());
        assert!((cert.mass - cert.bound).abs() <= 1e-12 * cert.bound);
    }

    #[test]
    fn radius_choice() {
        let row = [0.0, 1.0, 2.5, 4.0];
        assert_eq!(ball_radius_above(&row, 1.0), 2.0);
        assert_eq!(ball_radius_above(&[0.0, 1.0, 1.5], 1.0), 1.25);
        assert_eq!(ball_radius_above(&row, 2.5), 3.0);
        assert_eq!(ball_radius_above(&row, 4.0), 5.0);
    }
}
