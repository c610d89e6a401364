//! Exact one-dimensional quadratic transport between piecewise-uniform measures.
//!
//! A measure is a sorted list of [`Segment`]s; each carries mass spread
//! uniformly on `[lo, hi]` (an atom when `lo == hi`). Its quantile function is
//! piecewise linear in the probability variable, so merging the two sequences
//! of CDF breakpoints and integrating the squared difference of two linear
//! functions on each piece gives `W2^2` in closed form.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, mass: f64) -> Self {
        Self { lo, hi, mass }
    }

    pub fn atom(x: f64, mass: f64) -> Self {
        Self { lo: x, hi: x, mass }
    }

    #[inline]
    fn position(&self, fraction: f64) -> f64 {
        self.lo + fraction * (self.hi - self.lo)
    }
}

/// Cursor over a segment list in probability space.
struct Walker<'a> {
    segs: &'a [Segment],
    idx: usize,
    /// mass of the current segment already consumed
    used: f64,
}

impl<'a> Walker<'a> {
    fn new(segs: &'a [Segment]) -> Self {
        let mut w = Walker {
            segs,
            idx: 0,
            used: 0.0,
        };
        w.skip_empty();
        w
    }

    fn skip_empty(&mut self) {
        while self.idx < self.segs.len() && self.segs[self.idx].mass - self.used <= 0.0 {
            self.idx += 1;
            self.used = 0.0;
        }
    }

    fn done(&self) -> bool {
        self.idx >= self.segs.len()
    }

    fn remaining(&self) -> f64 {
        self.segs[self.idx].mass - self.used
    }

    fn position(&self, extra: f64) -> f64 {
        let s = &self.segs[self.idx];
        s.position(((self.used + extra) / s.mass).min(1.0))
    }

    fn advance(&mut self, dq: f64, exhaust: bool) {
        if exhaust {
            self.idx += 1;
            self.used = 0.0;
            self.skip_empty();
        } else {
            self.used += dq;
        }
    }
}

/// `W2^2` between two segment lists, each sorted by position and of equal total mass.
///
/// Any trailing mismatch of total mass (from rounding) is ignored.
pub fn wasserstein2_sq(a: &[Segment], b: &[Segment]) -> f64 {
    let mut wa = Walker::new(a);
    let mut wb = Walker::new(b);
    let mut acc = 0.0;
    while !wa.done() && !wb.done() {
        let ra = wa.remaining();
        let rb = wb.remaining();
        let (dq, exhaust_a, exhaust_b) = if ra < rb {
            (ra, true, false)
        } else if rb < ra {
            (rb, false, true)
        } else {
            (ra, true, true)
        };
        let d0 = wa.position(0.0) - wb.position(0.0);
        let d1 = if exhaust_a { wa.segs[wa.idx].hi } else { wa.position(dq) }
            - if exhaust_b { wb.segs[wb.idx].hi } else { wb.position(dq) };
        acc += dq * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        wa.advance(dq, exhaust_a);
        wb.advance(dq, exhaust_b);
    }
    acc
}

pub fn wasserstein2(a: &[Segment], b: &[Segment]) -> f64 {
    wasserstein2_sq(a, b).max(0.0).sqrt()
}

/// `W2` between two finitely supported (atomic) measures given as `(position, weight)`.
///
/// Weights are normalised internally; atoms need not be sorted.
pub fn wasserstein2_atoms(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let prep = |v: &[(f64, f64)]| {
        let total: f64 = v.iter().map(|p| p.1).sum();
        let mut s: Vec<Segment> = v.iter().map(|&(x, w)| Segment::atom(x, w / total)).collect();
        s.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        s
    };
    wasserstein2(&prep(a), &prep(b))
}
