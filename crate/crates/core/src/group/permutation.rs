use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{0, .., k-1}`; printed on the symbols `1..=k`.
///
/// Composition is left to right: `a.then(&b)` applies `a` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return Err(Error::InvalidPermutation(format!(
                    "{:?} is not a bijection",
                    images.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            images: (0..k).collect(),
        }
    }

    /// Builds a permutation of degree `k` from 0-based cycles.
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..k).collect();
        let mut used = vec![false; k];
        for c in cycles {
            for (n, &a) in c.iter().enumerate() {
                if a >= k {
                    return Err(Error::InvalidPermutation(format!(
                        "symbol {} exceeds degree {k}",
                        a + 1
                    )));
                }
                if used[a] {
                    return Err(Error::InvalidPermutation(format!(
                        "symbol {} appears twice",
                        a + 1
                    )));
                }
                used[a] = true;
                images[a] = c[(n + 1) % c.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// `g^-1 . self . g`, i.e. relabels every symbol `i` as `g(i)`.
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        g.inverse().then(self).then(g)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Disjoint cycles of length at least two, each starting at its smallest symbol, sorted
    /// by that symbol.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut j = self.images[start];
            while j != start {
                seen[j] = true;
                c.push(j);
                j = self.images[j];
            }
            if c.len() > 1 {
                out.push(c);
            }
        }
        out
    }

    /// Lengths of the nontrivial cycles, longest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn is_even(&self) -> bool {
        self.cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 0
    }

    /// Order of the permutation as a group element.
    pub fn order(&self) -> u128 {
        fn gcd(a: u128, b: u128) -> u128 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .fold(1u128, |acc, c| acc / gcd(acc, c.len() as u128) * c.len() as u128)
    }

    /// Space-separated 1-based images.
    pub fn one_line(&self) -> String {
        self.images
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses cycle notation `(1,2)(3,4)` or one-line notation `2 1 4 3`.
    ///
    /// In cycle notation without separators, e.g. `(126)(345)`, every digit is a symbol.
    /// `degree` is required for cycle notation unless the largest symbol should be used.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Self> {
        let text = text.trim();
        if text.contains('(') {
            let cycles = parse_cycles(text)?;
            let max = cycles.iter().flatten().map(|&a| a + 1).max().unwrap_or(0);
            let k = degree.unwrap_or(max);
            if max > k {
                return Err(Error::InvalidPermutation(format!(
                    "symbol {max} exceeds degree {k}"
                )));
            }
            Self::from_cycles(k, &cycles)
        } else {
            let images = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::InvalidPermutation(format!("bad symbol `{s}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(k) = degree {
                if images.len() != k {
                    return Err(Error::DegreeMismatch {
                        expected: k,
                        got: images.len(),
                    });
                }
            }
            Self::new(images)
        }
    }
}

fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut cycles = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        let Some(body) = rest.strip_prefix('(') else {
            return Err(Error::InvalidPermutation(format!("expected `(` in `{text}`")));
        };
        let Some(end) = body.find(')') else {
            return Err(Error::InvalidPermutation(format!("unclosed cycle in `{text}`")));
        };
        let inner = body[..end].trim();
        rest = &body[end + 1..];
        if inner.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = if inner.contains(',') || inner.contains(char::is_whitespace) {
            inner
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect()
        } else {
            (0..inner.len()).map(|i| &inner[i..i + 1]).collect()
        };
        let cycle = tokens
            .iter()
            .map(|s| match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::InvalidPermutation(format!("bad symbol `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        cycles.push(cycle);
    }
    Ok(cycles)
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

/// Reads a permutation list: one permutation per line, blank lines and `#` comments
/// ignored. A line `degree N` fixes the degree; otherwise it is the largest symbol seen.
pub fn parse_permutation_list(text: &str) -> Result<Vec<Permutation>> {
    let mut degree: Option<usize> = None;
    let mut lines: Vec<&str> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(d) = line.strip_prefix("degree") {
            let d = d.trim().parse::<usize>().map_err(|_| {
                Error::InvalidPermutation(format!("bad degree line `{line}`"))
            })?;
            degree = Some(d);
            continue;
        }
        lines.push(line.trim_end_matches([',', '.']));
    }
    if degree.is_none() {
        let mut max = 0;
        for l in &lines {
            let p = Permutation::parse(l, None)?;
            max = max.max(p.degree());
        }
        degree = Some(max);
    }
    lines
        .iter()
        .map(|l| Permutation::parse(l, degree))
        .collect()
}
