//! Permutations on `{1..degree}` stored as zero-based image vectors.

use crate::error::{Error, Result};

pub type Perm = Vec<u32>;

pub fn identity(degree: usize) -> Perm {
    (0..degree as u32).collect()
}

/// `(f g)(x) = f(g(x))`: the right factor acts first.
pub fn compose(f: &[u32], g: &[u32]) -> Perm {
    g.iter().map(|&x| f[x as usize]).collect()
}

pub fn inverse(f: &[u32]) -> Perm {
    let mut out = vec![0; f.len()];
    for (i, &x) in f.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

pub fn is_bijection(f: &[u32]) -> bool {
    let mut seen = vec![false; f.len()];
    for &x in f {
        let x = x as usize;
        if x >= f.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Builds a permutation from 1-based cycles.
pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
    let mut p = identity(degree);
    let mut touched = vec![false; degree];
    for cyc in cycles {
        for (k, &a) in cyc.iter().enumerate() {
            if a == 0 || a > degree {
                return Err(Error::Precondition(format!("point {a} outside 1..{degree}")));
            }
            if touched[a - 1] {
                return Err(Error::Precondition(format!("point {a} repeated in cycles")));
            }
            touched[a - 1] = true;
            let b = cyc[(k + 1) % cyc.len()];
            if b == 0 || b > degree {
                return Err(Error::Precondition(format!("point {b} outside 1..{degree}")));
            }
            p[a - 1] = (b - 1) as u32;
        }
    }
    Ok(p)
}

/// Parses cycle notation such as `(1 2)(3 4)` or `(1,2,3)`; `()` and `e` denote the identity.
/// The returned degree is the largest point mentioned.
pub fn parse_cycles(text: &str) -> std::result::Result<Vec<Vec<usize>>, String> {
    let t = text.trim();
    if t.is_empty() || t == "e" || t == "()" || t == "id" {
        return Ok(Vec::new());
    }
    let mut cycles = Vec::new();
    let mut rest = t;
    while !rest.is_empty() {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if !rest.starts_with('(') {
            return Err(format!("expected '(' in {t:?}"));
        }
        let close = rest.find(')').ok_or_else(|| format!("unclosed cycle in {t:?}"))?;
        let body = &rest[1..close];
        let mut cyc = Vec::new();
        for tok in body.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: usize = tok.parse().map_err(|_| format!("bad point {tok:?} in {t:?}"))?;
            if v == 0 {
                return Err(format!("points are 1-based, found 0 in {t:?}"));
            }
            cyc.push(v);
        }
        if !cyc.is_empty() {
            cycles.push(cyc);
        }
        rest = &rest[close + 1..];
    }
    Ok(cycles)
}

pub fn max_point(cycles: &[Vec<usize>]) -> usize {
    cycles.iter().flatten().copied().max().unwrap_or(0)
}

/// Cycle notation with 1-based points; the identity prints as `()`.
pub fn to_cycles_string(p: &[u32]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] as usize == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        let mut first = true;
        while !seen[x] {
            seen[x] = true;
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&(x + 1).to_string());
            x = p[x] as usize;
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_applies_right_factor_first() {
        let a = from_cycles(3, &[vec![1, 2]]).unwrap();
        let b = from_cycles(3, &[vec![1, 2, 3]]).unwrap();
        // (12)(123): 1 -> 2 -> 1, 2 -> 3, 3 -> 1 -> 2
        let ab = compose(&a, &b);
        assert_eq!(to_cycles_string(&ab), "(2 3)");
    }

    #[test]
    fn round_trip() {
        let cycles = parse_cycles("(1 3 2)(4 5)").unwrap();
        let p = from_cycles(5, &cycles).unwrap();
        assert_eq!(to_cycles_string(&p), "(1 3 2)(4 5)");
        assert_eq!(to_cycles_string(&identity(4)), "()");
        assert_eq!(compose(&p, &inverse(&p)), identity(5));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_cycles("(1 2").is_err());
        assert!(parse_cycles("1 2").is_err());
        assert!(parse_cycles("(0 1)").is_err());
        assert!(from_cycles(3, &[vec![1, 4]]).is_err());
        assert!(from_cycles(3, &[vec![1, 2], vec![2, 3]]).is_err());
    }
}
