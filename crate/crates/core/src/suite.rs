//! Built-in identity cases and random in-range configurations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cone::{shift_offset, ConePoint, Convention, MultiIndex, TubePoint};
use crate::error::{Error, Result};
use crate::identities::{check_ranges, IdentityCase, IdentityId, IdentityPoint};

pub const ALL_IDENTITIES: [IdentityId; 8] = [
    IdentityId::LaplacePower,
    IdentityId::Kernel,
    IdentityId::ShiftedLaplacePower,
    IdentityId::ShiftedKernel,
    IdentityId::ConeShift,
    IdentityId::HorizontalAbs,
    IdentityId::TubeProduct,
    IdentityId::TubeAbs,
];

fn cone(c: &[f64]) -> ConePoint {
    ConePoint::new(c.to_vec()).expect("built-in point")
}

fn tube(x: &[f64], y: &[f64]) -> TubePoint {
    TubePoint::new(x.to_vec(), cone(y)).expect("built-in point")
}

fn idx(v: &[f64], c: Convention) -> MultiIndex {
    MultiIndex::new(v.to_vec(), c).expect("finite")
}

/// One fixed case per identity for `n ∈ {1, 2, 3}`.
pub fn default_cases(n: usize) -> Result<Vec<IdentityCase>> {
    let (y, z, xi, s, lit): (ConePoint, TubePoint, TubePoint, Vec<f64>, [Vec<f64>; 7]) = match n {
        1 => (
            cone(&[1.3]),
            tube(&[0.3], &[1.0]),
            tube(&[-0.2], &[0.7]),
            vec![0.5],
            [vec![3.0], vec![1.0], vec![2.0], vec![0.5], vec![2.5], vec![2.5], vec![4.0]],
        ),
        2 => (
            cone(&[1.2, 2.0, 0.4]),
            tube(&[0.2, -0.1, 0.3], &[1.2, 2.0, 0.4]),
            tube(&[0.1, 0.0, -0.1], &[0.8, 1.5, -0.2]),
            vec![0.5, -0.3],
            [vec![4.0, 4.0], vec![0.5, 0.5], vec![3.0, 4.0], vec![0.5, 0.5], vec![3.0, 3.0], vec![3.0, 3.0], vec![5.0, 5.0]],
        ),
        3 => (
            cone(&[1.2, 0.9, 2.0, 0.4, -0.3]),
            tube(&[0.1, -0.1, 0.2, 0.1, 0.0], &[1.2, 0.9, 2.0, 0.4, -0.3]),
            tube(&[0.0, 0.1, -0.1, 0.0, 0.1], &[0.9, 1.1, 1.6, 0.2, 0.1]),
            vec![0.5, -0.3, 0.2],
            [
                vec![5.0, 5.0, 5.0],
                vec![0.5, 0.5, 0.5],
                vec![3.0, 3.0, 4.0],
                vec![0.5, 0.5, 0.5],
                vec![3.0, 3.0, 3.0],
                vec![4.5, 4.5, 3.0],
                vec![6.0, 6.0, 6.0],
            ],
        ),
        _ => return Err(Error::InvalidInput(format!("built-in cases exist for n = 1, 2, 3, not {n}"))),
    };
    let [shift_r, shift_eta, horiz_r, tube_l, tube_r, tube_eta, abs_r] = lit;
    let sh = |v: &[f64]| idx(v, Convention::Shifted);
    let pl = idx(&s, Convention::Plain);
    let cases = vec![
        IdentityCase::new(IdentityId::LaplacePower, vec![pl.clone()], IdentityPoint::Cone { point: y.clone() })?,
        IdentityCase::new(IdentityId::Kernel, vec![pl.map(|v| v.abs())], IdentityPoint::Tube { point: z.clone() })?,
        IdentityCase::new(IdentityId::ShiftedLaplacePower, vec![pl.clone()], IdentityPoint::Cone { point: y.clone() })?,
        IdentityCase::new(IdentityId::ShiftedKernel, vec![pl.map(|v| v.abs())], IdentityPoint::Tube { point: z.clone() })?,
        IdentityCase::new(IdentityId::ConeShift, vec![sh(&shift_r), sh(&shift_eta)], IdentityPoint::Cone { point: y.clone() })?,
        IdentityCase::new(IdentityId::HorizontalAbs, vec![sh(&horiz_r)], IdentityPoint::Cone { point: y.clone() })?,
        IdentityCase::new(
            IdentityId::TubeProduct,
            vec![sh(&tube_l), sh(&tube_r), sh(&tube_eta)],
            IdentityPoint::TubePair { z: z.clone(), xi },
        )?,
        IdentityCase::new(IdentityId::TubeAbs, vec![sh(&tube_l), sh(&abs_r)], IdentityPoint::Tube { point: z })?,
    ];
    for c in &cases {
        check_ranges(c)?;
    }
    Ok(cases)
}

/// Cone point with diagonal entries in `[0.5, 2]`, borders inside half the
/// admissible width and Schur complement in `[0.5, 2]`.
pub fn random_cone_point(n: usize, rng: &mut ChaCha8Rng) -> ConePoint {
    let head: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.5..2.0)).collect();
    let border: Vec<f64> = head.iter().map(|h| rng.random_range(-0.5..0.5) * h.sqrt()).collect();
    ConePoint::from_canonical(&head, &border, rng.random_range(0.5..2.0)).expect("positive canonical data")
}

pub fn random_tube_point(n: usize, rng: &mut ChaCha8Rng) -> TubePoint {
    let x = (0..2 * n - 1).map(|_| rng.random_range(-0.5..0.5)).collect();
    TubePoint::new(x, random_cone_point(n, rng)).expect("dimensions agree")
}

fn draw(n: usize, rng: &mut ChaCha8Rng, head: (f64, f64), last: (f64, f64)) -> Vec<f64> {
    (0..n).map(|j| if j + 1 < n { rng.random_range(head.0..head.1) } else { rng.random_range(last.0..last.1) }).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Random case of `id` whose literal exponents sit at least about 1/2 inside
/// the convergence region; the stated range is enforced by rejection.
pub fn random_case(id: IdentityId, n: usize, rng: &mut ChaCha8Rng) -> Result<IdentityCase> {
    let nf = n as f64;
    let shift = shift_offset(n);
    for _ in 0..1000 {
        let base = draw(n, rng, (-0.9, 1.5), (-0.5, 1.5));
        let unshift = |v: &[f64]| -> MultiIndex {
            let p: Vec<f64> = v.iter().enumerate().map(|(j, x)| if j + 1 < n { x - shift } else { *x }).collect();
            idx(&p, Convention::Plain)
        };
        let sh = |v: &[f64]| idx(v, Convention::Shifted);
        let (indices, point) = match id {
            IdentityId::LaplacePower => (vec![idx(&base, Convention::Plain)], IdentityPoint::Cone { point: random_cone_point(n, rng) }),
            IdentityId::ShiftedLaplacePower => (vec![unshift(&base)], IdentityPoint::Cone { point: random_cone_point(n, rng) }),
            IdentityId::Kernel => (vec![idx(&base, Convention::Plain)], IdentityPoint::Tube { point: random_tube_point(n, rng) }),
            IdentityId::ShiftedKernel => (vec![unshift(&base)], IdentityPoint::Tube { point: random_tube_point(n, rng) }),
            IdentityId::ConeShift => {
                let gap = draw(n, rng, (2.7, 4.5), ((nf + 1.0) / 2.0 + 0.7, (nf + 1.0) / 2.0 + 2.5));
                (vec![sh(&add(&base, &gap)), sh(&base)], IdentityPoint::Cone { point: random_cone_point(n, rng) })
            }
            IdentityId::HorizontalAbs => {
                let r = draw(n, rng, (2.7, 4.5), ((nf + 1.0) / 2.0 + 0.7, (nf + 1.0) / 2.0 + 2.5));
                (vec![sh(&r)], IdentityPoint::Cone { point: random_cone_point(n, rng) })
            }
            IdentityId::TubeAbs => {
                let gap = draw(n, rng, (4.2, 6.0), (nf + 1.7, nf + 3.5));
                (vec![sh(&base), sh(&add(&base, &gap))], IdentityPoint::Tube { point: random_tube_point(n, rng) })
            }
            IdentityId::TubeProduct => {
                let r = draw(n, rng, (shift + 1.2, shift + 3.5), (0.7, nf + 1.5));
                let eta = draw(n, rng, (nf + shift + 0.3, nf + shift + 2.5), ((nf + 1.0) / 2.0 + 0.3, (nf + 1.0) / 2.0 + 2.5));
                let total: Vec<f64> = (0..n).map(|j| r[j] + eta[j] - base[j]).collect();
                let ok = (0..n).all(|j| total[j] > if j + 1 < n { 4.2 } else { nf + 1.7 });
                if !ok {
                    continue;
                }
                (vec![sh(&base), sh(&r), sh(&eta)], IdentityPoint::TubePair { z: random_tube_point(n, rng), xi: random_tube_point(n, rng) })
            }
        };
        let case = IdentityCase::new(id, indices, point)?;
        if check_ranges(&case).is_ok() {
            return Ok(case);
        }
    }
    Err(Error::Construction(format!("no in-range {id} case found at n = {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn defaults_are_in_range() {
        for n in 1..=3 {
            assert_eq!(default_cases(n).unwrap().len(), 8);
        }
        assert!(default_cases(4).is_err());
    }

    #[test]
    fn random_cases_are_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for id in ALL_IDENTITIES {
                for _ in 0..20 {
                    let c = random_case(id, n, &mut rng).unwrap();
                    assert!(check_ranges(&c).is_ok());
                }
            }
        }
    }
}
