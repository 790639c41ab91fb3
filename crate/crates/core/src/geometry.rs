//! Rectangle-union region algebra in the Frenet plane.
//!
//! All partitioning geometry reduces to axis-aligned rectangles whose
//! coordinates are arc length `s` and lateral offset `d`. A [`Region`] is a
//! canonical finite union of such rectangles: positive area only, pairwise
//! interior-disjoint. The operations here (intersection, difference, closure
//! contact, area) are exact for coordinates taken from shared cut lines.

use num_traits::Float;

/// Contact tolerance for regions whose coordinates were not derived from
/// shared cut lines (externally supplied geometry).
pub const DEFAULT_CONTACT_EPS: f64 = 1e-9;

/// Axis-aligned rectangle in Frenet coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetRect<T> {
    pub s_lo: T,
    pub s_hi: T,
    pub d_lo: T,
    pub d_hi: T,
}

impl<T: Float> FrenetRect<T> {
    /// Builds a rectangle; panics if a low bound exceeds its high bound.
    pub fn new(s_lo: T, s_hi: T, d_lo: T, d_hi: T) -> Self {
        assert!(s_lo <= s_hi && d_lo <= d_hi, "inverted rectangle bounds");
        Self { s_lo, s_hi, d_lo, d_hi }
    }

    pub fn area(&self) -> T {
        (self.s_hi - self.s_lo) * (self.d_hi - self.d_lo)
    }

    /// True when the rectangle has positive area in both axes.
    pub fn has_positive_area(&self) -> bool {
        self.s_lo < self.s_hi && self.d_lo < self.d_hi
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains(&self, s: T, d: T) -> bool {
        self.s_lo <= s && s <= self.s_hi && self.d_lo <= d && d <= self.d_hi
    }

    /// Strict containment: interior points only.
    pub fn contains_interior(&self, s: T, d: T) -> bool {
        self.s_lo < s && s < self.s_hi && self.d_lo < d && d < self.d_hi
    }

    /// Intersection with positive area, if any. Shared edges or corners
    /// produce `None` (open-set semantics).
    pub fn intersection(&self, other: &Self) -> Option<Self> {
        let s_lo = self.s_lo.max(other.s_lo);
        let s_hi = self.s_hi.min(other.s_hi);
        let d_lo = self.d_lo.max(other.d_lo);
        let d_hi = self.d_hi.min(other.d_hi);
        if s_lo < s_hi && d_lo < d_hi {
            Some(Self { s_lo, s_hi, d_lo, d_hi })
        } else {
            None
        }
    }

    /// Closure contact within `eps`; includes single-point corner contact.
    pub fn closure_touches(&self, other: &Self, eps: T) -> bool {
        self.s_lo <= other.s_hi + eps
            && other.s_lo <= self.s_hi + eps
            && self.d_lo <= other.d_hi + eps
            && other.d_lo <= self.d_hi + eps
    }

    /// Distance between the s-projections of two rectangles (0 if they touch).
    pub fn s_distance(&self, other: &Self) -> T {
        let gap = (other.s_lo - self.s_hi).max(self.s_lo - other.s_hi);
        gap.max(T::zero())
    }

    /// Removes `other` from `self`, returning the up-to-four remaining pieces.
    fn subtract_rect(&self, other: &Self) -> Vec<Self> {
        if self.intersection(other).is_none() {
            return vec![*self];
        }
        let mut out = Vec::new();
        // Left and right slabs over the full d-span.
        if self.s_lo < other.s_lo {
            out.push(Self { s_lo: self.s_lo, s_hi: other.s_lo.min(self.s_hi), ..*self });
        }
        if other.s_hi < self.s_hi {
            out.push(Self { s_lo: other.s_hi.max(self.s_lo), s_hi: self.s_hi, ..*self });
        }
        // Middle band: clip d.
        let mid_lo = self.s_lo.max(other.s_lo);
        let mid_hi = self.s_hi.min(other.s_hi);
        if mid_lo < mid_hi {
            if self.d_lo < other.d_lo {
                out.push(Self { s_lo: mid_lo, s_hi: mid_hi, d_lo: self.d_lo, d_hi: other.d_lo.min(self.d_hi) });
            }
            if other.d_hi < self.d_hi {
                out.push(Self { s_lo: mid_lo, s_hi: mid_hi, d_lo: other.d_hi.max(self.d_lo), d_hi: self.d_hi });
            }
        }
        out.retain(FrenetRect::has_positive_area);
        out
    }
}

/// Canonical finite union of positive-area rectangles with pairwise disjoint
/// interiors. Value type: all operations are pure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region<T> {
    rects: Vec<FrenetRect<T>>,
}

impl<T: Float> Region<T> {
    pub fn empty() -> Self {
        Self { rects: Vec::new() }
    }

    pub fn from_rect(rect: FrenetRect<T>) -> Self {
        Self::from_rects(vec![rect])
    }

    /// Canonicalizes an arbitrary (possibly overlapping) rectangle collection.
    pub fn from_rects(rects: Vec<FrenetRect<T>>) -> Self {
        Self { rects: canonicalize(rects) }
    }

    pub fn rects(&self) -> &[FrenetRect<T>] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    /// Exact area; rectangles are interior-disjoint so plain summation works.
    pub fn area(&self) -> T {
        self.rects.iter().fold(T::zero(), |acc, r| acc + r.area())
    }

    /// Closed containment test.
    pub fn contains(&self, s: T, d: T) -> bool {
        self.rects.iter().any(|r| r.contains(s, d))
    }

    /// Set intersection; boundary-only overlap yields the empty region.
    pub fn intersect(&self, other: &Self) -> Self {
        let mut pieces = Vec::new();
        for a in &self.rects {
            for b in &other.rects {
                if let Some(r) = a.intersection(b) {
                    pieces.push(r);
                }
            }
        }
        Self::from_rects(pieces)
    }

    /// Set difference, re-canonicalized to positive-area rectangles.
    pub fn subtract(&self, other: &Self) -> Self {
        let mut pieces: Vec<FrenetRect<T>> = self.rects.clone();
        for b in &other.rects {
            pieces = pieces.iter().flat_map(|p| p.subtract_rect(b)).collect();
        }
        Self::from_rects(pieces)
    }

    /// Exact closure-contact test (tolerance 0); single-point corner contact
    /// counts. Coordinates produced by the partitioning share cut lines, so
    /// equality is exact by construction.
    pub fn closures_touch(&self, other: &Self) -> bool {
        self.closures_touch_within(other, T::zero())
    }

    /// Closure-contact test with a tolerance, for externally supplied regions.
    pub fn closures_touch_within(&self, other: &Self, eps: T) -> bool {
        self.rects
            .iter()
            .any(|a| other.rects.iter().any(|b| a.closure_touches(b, eps)))
    }

    /// Minimum s-axis distance from any rectangle of the region to `rect`
    /// (0 when they touch). `None` for the empty region.
    pub fn s_distance_to(&self, rect: &FrenetRect<T>) -> Option<T> {
        self.rects
            .iter()
            .map(|r| r.s_distance(rect))
            .fold(None, |acc: Option<T>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    /// Overall s-extent `(min, max)`, or `None` when empty.
    pub fn s_extent(&self) -> Option<(T, T)> {
        let lo = self.rects.iter().map(|r| r.s_lo).fold(None, min_fold)?;
        let hi = self.rects.iter().map(|r| r.s_hi).fold(None, max_fold)?;
        Some((lo, hi))
    }

    /// Lateral extent of the union at arc length `s` (closed s-span match):
    /// `(d_lo, d_hi)` over all rectangles covering `s`, or `None` when no
    /// rectangle covers that arc length.
    pub fn lateral_extent_at(&self, s: T) -> Option<(T, T)> {
        let covering = self.rects.iter().filter(|r| r.s_lo <= s && s <= r.s_hi);
        let mut lo = None;
        let mut hi = None;
        for r in covering {
            lo = min_fold(lo, r.d_lo);
            hi = max_fold(hi, r.d_hi);
        }
        Some((lo?, hi?))
    }
}

fn min_fold<T: Float>(acc: Option<T>, v: T) -> Option<T> {
    Some(acc.map_or(v, |a| a.min(v)))
}

fn max_fold<T: Float>(acc: Option<T>, v: T) -> Option<T> {
    Some(acc.map_or(v, |a| a.max(v)))
}

/// Decomposes a rectangle collection into the canonical form: slab sweep along
/// s, merging d-intervals per slab, then coalescing adjacent slabs that share
/// an identical interval stack. Exact for shared cut lines, deterministic.
fn canonicalize<T: Float>(mut rects: Vec<FrenetRect<T>>) -> Vec<FrenetRect<T>> {
    rects.retain(FrenetRect::has_positive_area);
    if rects.is_empty() {
        return rects;
    }
    let mut cuts: Vec<T> = rects.iter().flat_map(|r| [r.s_lo, r.s_hi]).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("non-finite coordinate"));
    cuts.dedup();

    // Per slab: merged list of covering d-intervals.
    type Slab<T> = (T, T, Vec<(T, T)>);
    let mut slabs: Vec<Slab<T>> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut intervals: Vec<(T, T)> = rects
            .iter()
            .filter(|r| r.s_lo <= lo && hi <= r.s_hi)
            .map(|r| (r.d_lo, r.d_hi))
            .collect();
        if intervals.is_empty() {
            continue;
        }
        intervals.sort_by(|a, b| a.partial_cmp(b).expect("non-finite coordinate"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(intervals.len());
        for (d_lo, d_hi) in intervals {
            match merged.last_mut() {
                Some(last) if d_lo <= last.1 => last.1 = last.1.max(d_hi),
                _ => merged.push((d_lo, d_hi)),
            }
        }
        // Coalesce with the previous slab when contiguous and identical.
        if let Some(prev) = slabs.last_mut() {
            if prev.1 == lo && prev.2 == merged {
                prev.1 = hi;
                continue;
            }
        }
        slabs.push((lo, hi, merged));
    }

    let mut out = Vec::new();
    for (s_lo, s_hi, intervals) in slabs {
        for (d_lo, d_hi) in intervals {
            out.push(FrenetRect { s_lo, s_hi, d_lo, d_hi });
        }
    }
    out
}

/// Extent of the 1-D constant-acceleration position `x(t) = x0 + v t + a t²/2`
/// over `[t0, t1]`, including the interior extremum when the velocity changes
/// sign inside the interval. Endpoint-only hulls would miss that vertex.
pub fn parabola_extent<T: Float>(x0: T, v: T, a: T, t0: T, t1: T) -> (T, T) {
    let pos = |t: T| x0 + v * t + a * t * t / T::from(2.0).unwrap();
    let (mut lo, mut hi) = (pos(t0).min(pos(t1)), pos(t0).max(pos(t1)));
    if a != T::zero() {
        let t_star = -v / a;
        if t0 < t_star && t_star < t1 {
            let x = pos(t_star);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo, hi)
}
