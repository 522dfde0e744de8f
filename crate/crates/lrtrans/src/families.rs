//! Named permutation-group families.

use crate::error::{precondition, Error, Result};
use crate::group_core::{group_from_generators, GroupTable};
use crate::perm::{self, Perm};

fn cycle(degree: usize, points: &[usize]) -> Perm {
    perm::from_cycles(degree, &[points.to_vec()]).expect("family cycles are well formed")
}

fn cycles(degree: usize, cs: &[&[usize]]) -> Perm {
    let v: Vec<Vec<usize>> = cs.iter().map(|c| c.to_vec()).collect();
    perm::from_cycles(degree, &v).expect("family cycles are well formed")
}

fn parse_n(arg: &str, name: &str) -> Result<usize> {
    arg.parse().map_err(|_| Error::Precondition(format!("bad parameter {arg:?} for family {name}")))
}

/// Permutation generators and degree for a family string such as `dihedral:5`.
pub fn family_generators(spec: &str) -> Result<(usize, Vec<Perm>)> {
    let (name, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::Precondition(format!("family {spec:?} must look like name:parameter")))?;
    let out = match name.trim() {
        "cyclic" => {
            let n = parse_n(arg, name)?;
            if n == 0 {
                return precondition("cyclic:0 is not a group");
            }
            let pts: Vec<usize> = (1..=n).collect();
            (n, if n > 1 { vec![cycle(n, &pts)] } else { vec![] })
        }
        "dihedral" => {
            let n = parse_n(arg, name)?;
            if n < 3 {
                return precondition("dihedral:n needs n >= 3");
            }
            let pts: Vec<usize> = (1..=n).collect();
            let pairs: Vec<Vec<usize>> = (2..=n).filter(|&i| i < n + 2 - i).map(|i| vec![i, n + 2 - i]).collect();
            let refl = perm::from_cycles(n, &pairs).expect("reflection is well formed");
            (n, vec![cycle(n, &pts), refl])
        }
        "symmetric" => {
            let n = parse_n(arg, name)?;
            if n == 0 {
                return precondition("symmetric:0 is not supported");
            }
            let pts: Vec<usize> = (1..=n).collect();
            match n {
                1 => (1, vec![]),
                2 => (2, vec![cycle(2, &[1, 2])]),
                _ => (n, vec![cycle(n, &[1, 2]), cycle(n, &pts)]),
            }
        }
        "alternating" => {
            let n = parse_n(arg, name)?;
            if n == 0 {
                return precondition("alternating:0 is not supported");
            }
            match n {
                1 | 2 => (n, vec![]),
                3 => (3, vec![cycle(3, &[1, 2, 3])]),
                _ => {
                    let long: Vec<usize> = if n % 2 == 1 { (1..=n).collect() } else { (2..=n).collect() };
                    (n, vec![cycle(n, &[1, 2, 3]), cycle(n, &long)])
                }
            }
        }
        "elementary" => {
            let (p, k) = arg
                .split_once('^')
                .ok_or_else(|| Error::Precondition(format!("elementary needs p^k, got {arg:?}")))?;
            let p = parse_n(p, name)?;
            let k = parse_n(k, name)?;
            if p < 2 || (2..p).any(|d| p % d == 0) {
                return precondition(format!("elementary:{p}^{k} needs a prime base"));
            }
            let degree = p * k;
            let gens = (0..k).map(|b| cycle(degree, &((b * p + 1)..=(b * p + p)).collect::<Vec<_>>())).collect();
            (degree.max(1), gens)
        }
        "frobenius" => match arg.trim() {
            // C7 ⋊ C3 acting on Z/7 by x -> x+1 and x -> 2x
            "21" => (7, vec![cycle(7, &[1, 2, 3, 4, 5, 6, 7]), cycles(7, &[&[2, 3, 5], &[4, 7, 6]])]),
            // C5 ⋊ C4 acting on Z/5 by x -> x+1 and x -> 2x
            "20" => (5, vec![cycle(5, &[1, 2, 3, 4, 5]), cycle(5, &[2, 3, 5, 4])]),
            other => return precondition(format!("frobenius:{other} is not available (use 20 or 21)")),
        },
        "quaternion" => match arg.trim() {
            "8" => (8, vec![cycles(8, &[&[1, 2, 3, 4], &[5, 6, 7, 8]]), cycles(8, &[&[1, 5, 3, 7], &[2, 8, 4, 6]])]),
            other => return precondition(format!("quaternion:{other} is not available (use 8)")),
        },
        other => return precondition(format!("unknown family {other:?}")),
    };
    Ok(out)
}

pub fn family(spec: &str) -> Result<GroupTable> {
    let (degree, gens) = family_generators(spec)?;
    group_from_generators(degree, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let cases = [
            ("cyclic:1", 1),
            ("cyclic:6", 6),
            ("cyclic:12", 12),
            ("dihedral:4", 8),
            ("dihedral:5", 10),
            ("dihedral:8", 16),
            ("symmetric:3", 6),
            ("symmetric:4", 24),
            ("alternating:4", 12),
            ("alternating:5", 60),
            ("elementary:2^4", 16),
            ("elementary:3^2", 9),
            ("frobenius:21", 21),
            ("frobenius:20", 20),
            ("quaternion:8", 8),
        ];
        for (spec, order) in cases {
            assert_eq!(family(spec).unwrap().order(), order, "{spec}");
        }
    }

    #[test]
    fn structure() {
        let q8 = family("quaternion:8").unwrap();
        let involutions = (1..8).filter(|&x| q8.element_order(x) == 2).count();
        assert_eq!(involutions, 1);
        assert!(!q8.is_abelian());
        assert!(family("elementary:3^2").unwrap().is_abelian());
        assert!(!family("frobenius:21").unwrap().is_abelian());
        let f20 = family("frobenius:20").unwrap();
        assert_eq!((0..20).map(|x| f20.element_order(x)).max(), Some(5));
    }

    #[test]
    fn rejects_unknown() {
        assert!(family("frobenius:22").is_err());
        assert!(family("elementary:4^2").is_err());
        assert!(family("bogus:3").is_err());
        assert!(family("cyclic").is_err());
    }
}
