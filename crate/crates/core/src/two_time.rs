//! Two-time functions on the discrete grid (Green and hybridization functions).

use std::fmt;

use num_complex::Complex64 as C64;

use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Lesser,
    Greater,
}

impl Component {
    pub const ALL: [Component; 2] = [Component::Lesser, Component::Greater];

    pub fn name(self) -> &'static str {
        match self {
            Component::Lesser => "lesser",
            Component::Greater => "greater",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lesser" => Some(Component::Lesser),
            "greater" => Some(Component::Greater),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Down, Spin::Up];

    pub fn index(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Down => Spin::Up,
            Spin::Up => Spin::Down,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Spin::Down => "down",
            Spin::Up => "up",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "down" => Some(Spin::Down),
            "up" => Some(Spin::Up),
            _ => None,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One Keldysh component of a two-time function, indexed `(n, m)` ↔ `(t_n, t_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoTimeFunction {
    pub component: Component,
    pub spin: Spin,
    pub values: CMatrix,
}

impl TwoTimeFunction {
    pub fn zeros(component: Component, spin: Spin, len: usize) -> Self {
        Self {
            component,
            spin,
            values: CMatrix::zeros(len, len),
        }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.values[(n, m)]
    }

    pub fn set(&mut self, n: usize, m: usize, z: C64) {
        self.values[(n, m)] = z;
    }

    /// Fill the strict upper triangle from the lower one using
    /// `f(n, m) = -conj(f(m, n))`.
    pub fn fill_upper_from_lower(&mut self) {
        let len = self.len();
        for n in 0..len {
            for m in (n + 1)..len {
                self.values[(n, m)] = -self.values[(m, n)].conj();
            }
        }
    }

    /// Largest violation of `f(n, m) = -conj(f(m, n))`.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let len = self.len();
        let mut worst = 0.0_f64;
        for n in 0..len {
            for m in 0..=n {
                worst = worst.max((self.values[(n, m)] + self.values[(m, n)].conj()).norm());
            }
        }
        worst
    }

    /// Leading `len × len` block.
    pub fn truncated(&self, len: usize) -> Self {
        Self {
            component: self.component,
            spin: self.spin,
            values: self.values.view((0, 0), (len, len)).into_owned(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Lesser and greater components for both spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGreens {
    pub lesser: [TwoTimeFunction; 2],
    pub greater: [TwoTimeFunction; 2],
}

impl SpinGreens {
    pub fn zeros(len: usize) -> Self {
        Self {
            lesser: Spin::ALL.map(|s| TwoTimeFunction::zeros(Component::Lesser, s, len)),
            greater: Spin::ALL.map(|s| TwoTimeFunction::zeros(Component::Greater, s, len)),
        }
    }

    pub fn len(&self) -> usize {
        self.lesser[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, component: Component, spin: Spin) -> &TwoTimeFunction {
        match component {
            Component::Lesser => &self.lesser[spin.index()],
            Component::Greater => &self.greater[spin.index()],
        }
    }

    pub fn get_mut(&mut self, component: Component, spin: Spin) -> &mut TwoTimeFunction {
        match component {
            Component::Lesser => &mut self.lesser[spin.index()],
            Component::Greater => &mut self.greater[spin.index()],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &TwoTimeFunction> {
        self.lesser.iter().chain(self.greater.iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut TwoTimeFunction> {
        self.lesser.iter_mut().chain(self.greater.iter_mut())
    }

    /// Pointwise `0.5 * (a + b)`.
    pub fn average(a: &SpinGreens, b: &SpinGreens) -> SpinGreens {
        let mut out = a.clone();
        for (o, x) in out.iter_mut().zip(b.iter()) {
            o.values = (&o.values + &x.values).scale(0.5);
        }
        out
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self {
            lesser: [self.lesser[0].truncated(len), self.lesser[1].truncated(len)],
            greater: [self.greater[0].truncated(len), self.greater[1].truncated(len)],
        }
    }

    /// Worst violation of `G>(n,n) - G<(n,n) = -i` over both spins.
    pub fn sum_rule_defect(&self) -> f64 {
        let minus_i = C64::new(0.0, -1.0);
        let mut worst = 0.0_f64;
        for s in Spin::ALL {
            let (l, g) = (&self.lesser[s.index()], &self.greater[s.index()]);
            for n in 0..l.len() {
                worst = worst.max((g.get(n, n) - l.get(n, n) - minus_i).norm());
            }
        }
        worst
    }

    pub fn skew_hermitian_defect(&self) -> f64 {
        self.iter().map(|f| f.skew_hermitian_defect()).fold(0.0, f64::max)
    }

    /// Worst violation of `lesser(n,m) = conj(greater(n,m))`.
    pub fn particle_hole_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for s in Spin::ALL {
            let d = &self.lesser[s.index()].values - self.greater[s.index()].values.map(|z| z.conj());
            worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        worst
    }
}

impl Default for SpinGreens {
    fn default() -> Self {
        Self::zeros(0)
    }
}
