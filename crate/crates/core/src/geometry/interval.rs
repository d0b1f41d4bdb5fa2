//! Boolean algebra on sorted lists of closed parameter spans.
//!
//! All lists are sorted by `enter` and pairwise disjoint. A span with
//! `enter == exit` is a tangent contact; it survives union and
//! intersection but never comes out of a cut made by a positive-length
//! span. Gaps narrower than `eps` are closed.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub enter: f64,
    pub exit: f64,
}

impl Span {
    pub fn new(enter: f64, exit: f64) -> Self {
        debug_assert!(enter <= exit);
        Self { enter, exit }
    }

    pub fn point(t: f64) -> Self {
        Self { enter: t, exit: t }
    }

    pub fn len(&self) -> f64 {
        self.exit - self.enter
    }

    pub fn is_point(&self) -> bool {
        self.exit <= self.enter
    }
}

pub(crate) fn union(a: &[Span], b: &[Span], eps: f64) -> Vec<Span> {
    let mut all: Vec<Span> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|p, q| {
        p.enter
            .total_cmp(&q.enter)
            .then_with(|| q.exit.total_cmp(&p.exit))
    });
    let mut out: Vec<Span> = Vec::with_capacity(all.len());
    for s in all {
        match out.last_mut() {
            Some(cur) if s.enter <= cur.exit + eps => {
                if s.exit > cur.exit {
                    cur.exit = s.exit;
                }
            }
            _ => out.push(s),
        }
    }
    out
}

pub(crate) fn intersection(a: &[Span], b: &[Span], eps: f64) -> Vec<Span> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (p, q) = (a[i], b[j]);
        let lo = p.enter.max(q.enter);
        let hi = p.exit.min(q.exit);
        if hi - lo > eps {
            out.push(Span::new(lo, hi));
        } else if hi >= lo - eps && (p.is_point() || q.is_point()) {
            let t = if p.is_point() { p.enter } else { q.enter };
            if out.last().is_none_or(|l: &Span| l.exit < t) {
                out.push(Span::point(t));
            }
        }
        if p.exit < q.exit {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub(crate) fn difference(a: &[Span], b: &[Span], eps: f64) -> Vec<Span> {
    let cutters: Vec<Span> = b.iter().copied().filter(|s| s.len() > eps).collect();
    let mut out = Vec::new();
    for &s in a {
        if s.is_point() {
            let t = s.enter;
            if !cutters.iter().any(|c| c.enter < t && t < c.exit) {
                out.push(s);
            }
            continue;
        }
        let mut pieces = alloc::vec![s];
        for c in &cutters {
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for p in pieces {
                if c.exit <= p.enter || c.enter >= p.exit {
                    next.push(p);
                    continue;
                }
                if c.enter - p.enter > eps {
                    next.push(Span::new(p.enter, c.enter));
                }
                if p.exit - c.exit > eps {
                    next.push(Span::new(c.exit, p.exit));
                }
            }
            pieces = next;
        }
        out.extend(pieces);
    }
    out
}
