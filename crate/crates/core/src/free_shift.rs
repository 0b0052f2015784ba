//! The free-shift automorphism on a truncated regular representation of the
//! free group on generators `g_i`, `i ∈ ℤ`.
//!
//! The truncation keeps reduced words of length at most `L` over a finite
//! generator window; `λ(s)` is compressed to that ball and stored as a
//! partial permutation.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::algebra::{SquareMatrix, ONE};
use crate::error::{LabError, Result};

pub const DEFAULT_MAX_LENGTH: usize = 3;
pub const POWER_ITERATION_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    pub gen: i32,
    /// `+1` or `−1`.
    pub exp: i8,
}

impl Letter {
    pub fn new(gen: i32, exp: i8) -> Self {
        debug_assert!(exp == 1 || exp == -1);
        Letter { gen, exp }
    }

    fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            exp: -self.exp,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.exp == -other.exp
    }
}

/// A reduced word; the empty word is the group identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn empty() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn generator(i: i32) -> Self {
        ReducedWord(vec![Letter::new(i, 1)])
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            match out.last() {
                Some(&last) if last.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        ReducedWord(out)
    }

    /// Parses `"g0 g1^-1 g2"`; `""` and `"e"` are the empty word.
    pub fn parse(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let body = tok
                .strip_prefix('g')
                .ok_or_else(|| LabError::Parse(format!("letter {tok:?} must start with 'g'")))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e),
                None => (body, "1"),
            };
            let gen: i32 = idx
                .parse()
                .map_err(|_| LabError::Parse(format!("bad generator index in {tok:?}")))?;
            let exp: i8 = match exp {
                "1" | "+1" => 1,
                "-1" => -1,
                _ => return Err(LabError::Parse(format!("exponent in {tok:?} must be ±1"))),
            };
            letters.push(Letter::new(gen, exp));
        }
        Ok(Self::from_letters(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    pub fn inverse(&self) -> Self {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// `(min, max)` generator index, `None` for the empty word.
    pub fn index_range(&self) -> Option<(i32, i32)> {
        let min = self.0.iter().map(|l| l.gen).min()?;
        let max = self.0.iter().map(|l| l.gen).max()?;
        Some((min, max))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            if l.exp == 1 {
                write!(f, "g{}", l.gen)?;
            } else {
                write!(f, "g{}^-1", l.gen)?;
            }
        }
        Ok(())
    }
}

/// Reduced form of `st`.
pub fn concat_reduce(s: &ReducedWord, t: &ReducedWord) -> ReducedWord {
    let a = s.letters();
    let b = t.letters();
    let mut cut = 0;
    while cut < a.len() && cut < b.len() && a[a.len() - 1 - cut].cancels(b[cut]) {
        cut += 1;
    }
    let mut out = Vec::with_capacity(a.len() + b.len() - 2 * cut);
    out.extend_from_slice(&a[..a.len() - cut]);
    out.extend_from_slice(&b[cut..]);
    let w = ReducedWord(out);
    debug_assert!(w.is_reduced());
    w
}

/// `β^steps(s)`: every generator index moves by `steps`.
pub fn shift(s: &ReducedWord, steps: i32) -> ReducedWord {
    ReducedWord(
        s.0.iter()
            .map(|l| Letter::new(l.gen + steps, l.exp))
            .collect(),
    )
}

/// Reduced words of length `≤ L` over generators `lo..=hi`.
#[derive(Clone, Debug)]
pub struct BallBasis {
    pub lo: i32,
    pub hi: i32,
    pub max_length: usize,
    words: Vec<ReducedWord>,
    index: HashMap<ReducedWord, usize>,
}

impl BallBasis {
    pub fn new(lo: i32, hi: i32, max_length: usize) -> Self {
        assert!(lo <= hi, "empty generator window");
        let letters: Vec<Letter> = (lo..=hi)
            .flat_map(|g| [Letter::new(g, 1), Letter::new(g, -1)])
            .collect();
        let mut words = vec![ReducedWord::empty()];
        let mut frontier = 0..1;
        for _ in 0..max_length {
            let start = words.len();
            for w in frontier.clone() {
                let last = words[w].0.last().copied();
                for &l in &letters {
                    if last.is_some_and(|x| x.cancels(l)) {
                        continue;
                    }
                    let mut v = words[w].0.clone();
                    v.push(l);
                    words.push(ReducedWord(v));
                }
            }
            frontier = start..words.len();
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(k, w)| (w.clone(), k))
            .collect();
        BallBasis {
            lo,
            hi,
            max_length,
            words,
            index,
        }
    }

    /// Window `[min − 1, max + n + 1]` covering `β^k(s)` for `k ≤ n`.
    pub fn auto(s: &ReducedWord, n: usize, max_length: usize) -> Self {
        let (lo, hi) = required_window(s, n);
        Self::new(lo - 1, hi + 1, max_length)
    }

    /// `1 + Σ_{p=1}^{L} m(m−1)^{p−1}` with `m = 2·(window width)`.
    pub fn expected_size(lo: i32, hi: i32, max_length: usize) -> usize {
        let m = 2 * (hi - lo + 1) as usize;
        let mut total = 1;
        let mut sphere = m;
        for _ in 0..max_length {
            total += sphere;
            sphere *= m - 1;
        }
        total
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[ReducedWord] {
        &self.words
    }

    pub fn index_of(&self, w: &ReducedWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn contains_window(&self, lo: i32, hi: i32) -> bool {
        self.lo <= lo && hi <= self.hi
    }
}

/// Letter indices `β^k(s)` reach for `1 ≤ k ≤ n`.
fn required_window(s: &ReducedWord, n: usize) -> (i32, i32) {
    match s.index_range() {
        Some((min, max)) => (min + 1, max + n as i32),
        None => (0, 0),
    }
}

/// Compression `P λ(s) P`: column `t` maps to row `index(st)` when `st` is in
/// the ball.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialPermutation {
    pub map: Vec<Option<usize>>,
}

impl PartialPermutation {
    pub fn dim(&self) -> usize {
        self.map.len()
    }

    /// Dense form; only sensible for small balls.
    pub fn to_dense(&self) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(self.dim());
        for (col, row) in self.map.iter().enumerate() {
            if let Some(r) = row {
                m.set(*r, col, ONE);
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (col, row) in self.map.iter().enumerate() {
            if let Some(r) = row {
                y[*r] += x[col];
            }
        }
        y
    }
}

pub fn lambda_truncated(s: &ReducedWord, ball: &BallBasis) -> PartialPermutation {
    PartialPermutation {
        map: ball
            .words()
            .iter()
            .map(|t| ball.index_of(&concat_reduce(s, t)))
            .collect(),
    }
}

/// `A_n = (1/n) Σ_{k=1}^{n} P λ(β^k s) P` in sparse form.
#[derive(Clone, Debug)]
pub struct ShiftAverage {
    pub n: usize,
    pub terms: Vec<PartialPermutation>,
}

impl ShiftAverage {
    pub fn new(s: &ReducedWord, n: usize, ball: &BallBasis) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidHorizon { min: 1, found: 0 });
        }
        let (need_lo, need_hi) = required_window(s, n);
        if !s.is_empty() && !ball.contains_window(need_lo, need_hi) {
            return Err(LabError::WindowTooNarrow {
                lo: ball.lo,
                hi: ball.hi,
                need_lo,
                need_hi,
            });
        }
        let shifted: Vec<ReducedWord> = (1..=n).map(|k| shift(s, k as i32)).collect();
        check_distinct(&shifted)?;
        Ok(ShiftAverage {
            n,
            terms: shifted.iter().map(|w| lambda_truncated(w, ball)).collect(),
        })
    }

    fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        let w = 1.0 / self.n as f64;
        for p in &self.terms {
            for (col, row) in p.map.iter().enumerate() {
                if let Some(r) = row {
                    y[*r] += w * x[col];
                }
            }
        }
        y
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        let w = 1.0 / self.n as f64;
        for p in &self.terms {
            for (col, row) in p.map.iter().enumerate() {
                if let Some(r) = row {
                    y[col] += w * x[*r];
                }
            }
        }
        y
    }

    /// `‖A_n‖` by power iteration on `A A*` from the normalized all-ones
    /// vector. The Rayleigh quotient never exceeds the true value.
    pub fn norm(&self) -> PowerIteration {
        let dim = self.dim();
        let mut u = vec![1.0 / (dim as f64).sqrt(); dim];
        let mut estimate = 0.0;
        let cap = 10 * dim;
        for it in 1..=cap {
            let v = self.apply(&self.apply_adjoint(&u));
            let rq: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv == 0.0 {
                return PowerIteration {
                    norm: 0.0,
                    iterations: it,
                    converged: true,
                };
            }
            u = v.into_iter().map(|x| x / nv).collect();
            let done = (rq - estimate).abs() <= POWER_ITERATION_RTOL * rq;
            estimate = rq;
            if done {
                return PowerIteration {
                    norm: estimate.sqrt(),
                    iterations: it,
                    converged: true,
                };
            }
        }
        PowerIteration {
            norm: estimate.sqrt(),
            iterations: cap,
            converged: false,
        }
    }
}

fn check_distinct(words: &[ReducedWord]) -> Result<()> {
    let mut seen: HashMap<&ReducedWord, usize> = HashMap::new();
    for (k, w) in words.iter().enumerate() {
        if seen.insert(w, k).is_some() {
            return Err(LabError::ShiftCollision(k + 1));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerIteration {
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn shift_average_norm(s: &ReducedWord, n: usize, ball: &BallBasis) -> Result<f64> {
    Ok(ShiftAverage::new(s, n, ball)?.norm().norm)
}

/// `2√(n−1)/n`, the norm of the average of `n` free generators.
pub fn free_generator_average_norm(n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        2.0 * ((n - 1) as f64).sqrt() / n as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HaagerupRow {
    pub n: usize,
    pub norm: f64,
    pub bound: f64,
    pub pass: bool,
    /// `bound − norm`.
    pub margin: f64,
    pub ball_size: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Largest `(1/n) Σ_k |⟨δ_t, λ(β^k s) δ_t⟩|` over words `t` of length ≤ 1.
    pub vector_state_sum: f64,
}

/// Norm of the shift average against the bound `(p+1)/√n` for each `n`,
/// each on its own auto-sized ball.
pub fn haagerup_bound_check(
    s: &ReducedWord,
    n_list: &[usize],
    max_length: usize,
) -> Result<Vec<HaagerupRow>> {
    let p = s.len();
    n_list
        .iter()
        .map(|&n| {
            let ball = BallBasis::auto(s, n, max_length);
            let avg = ShiftAverage::new(s, n, &ball)?;
            let pi = avg.norm();
            let bound = (p + 1) as f64 / (n as f64).sqrt();
            let probes = ball.words().iter().take_while(|t| t.len() <= 1).count();
            let vector_state_sum = (0..probes)
                .map(|t| {
                    avg.terms
                        .iter()
                        .filter(|m| m.map[t] == Some(t))
                        .count() as f64
                        / n as f64
                })
                .fold(0.0, f64::max);
            Ok(HaagerupRow {
                n,
                norm: pi.norm,
                bound,
                pass: pi.norm <= bound,
                margin: bound - pi.norm,
                ball_size: ball.len(),
                iterations: pi.iterations,
                converged: pi.converged,
                vector_state_sum,
            })
        })
        .collect()
}
