//! Base kernels on node and edge labels.
//!
//! Every variant is symmetric in its arguments. Vertex kernels must land in
//! `(0, 1]` and edge kernels in `[0, 1]`; the compact polynomial is clamped
//! into `[0, 1]` unless evaluated through [`BaseKernel::eval_strict`].

use std::fmt;
use std::str::FromStr;

use crate::error::KernelError;
use crate::graph::{Label, LabelShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRole {
    Vertex,
    Edge,
}

impl KernelRole {
    pub fn admits(self, value: f64) -> bool {
        match self {
            KernelRole::Vertex => value > 0.0 && value <= 1.0,
            KernelRole::Edge => (0.0..=1.0).contains(&value),
        }
    }

    fn range(self) -> &'static str {
        match self {
            KernelRole::Vertex => "(0, 1]",
            KernelRole::Edge => "[0, 1]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseKernel {
    ConstantOne,
    /// 1 on equal labels, `h` otherwise.
    KroneckerDelta { h: f64 },
    /// `exp(-alpha * |a - b|^2)`.
    SquareExponential { alpha: f64 },
    /// `sum_i c_i * r^i` with `r = |a - b|`, clamped into `[0, 1]`.
    CompactPolynomial { coeffs: Vec<f64> },
    /// Product of one kernel per label component.
    Product(Vec<BaseKernel>),
    /// Mean of the inner kernel over all component pairs of two label sets.
    RConvolution(Box<BaseKernel>),
}

#[derive(Clone, Copy)]
enum LabelRef<'a> {
    Cat(i64),
    Slice(&'a [f64]),
}

impl<'a> From<&'a Label> for LabelRef<'a> {
    fn from(l: &'a Label) -> Self {
        match l {
            Label::Cat(c) => LabelRef::Cat(*c),
            Label::Vector(v) => LabelRef::Slice(v),
        }
    }
}

fn cmp_slices(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl BaseKernel {
    pub fn name(&self) -> &'static str {
        match self {
            BaseKernel::ConstantOne => "constant-one",
            BaseKernel::KroneckerDelta { .. } => "kronecker-delta",
            BaseKernel::SquareExponential { .. } => "square-exponential",
            BaseKernel::CompactPolynomial { .. } => "compact-polynomial",
            BaseKernel::Product(_) => "product-composite",
            BaseKernel::RConvolution(_) => "r-convolution",
        }
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self, BaseKernel::ConstantOne)
    }

    /// Reject parameters that would leave the admissible output range.
    pub fn check_parameters(&self) -> Result<(), KernelError> {
        match self {
            BaseKernel::ConstantOne | BaseKernel::CompactPolynomial { .. } => Ok(()),
            BaseKernel::KroneckerDelta { h } if !(*h > 0.0 && *h <= 1.0) => Err(
                KernelError::InvalidParameter(format!("kronecker-delta h = {h} must lie in (0, 1]")),
            ),
            BaseKernel::SquareExponential { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => {
                Err(KernelError::InvalidParameter(format!(
                    "square-exponential alpha = {alpha} must be positive"
                )))
            }
            BaseKernel::Product(parts) if parts.is_empty() => Err(KernelError::InvalidParameter(
                "product-composite needs at least one component".into(),
            )),
            BaseKernel::Product(parts) => parts.iter().try_for_each(|k| k.check_parameters()),
            BaseKernel::RConvolution(inner) => inner.check_parameters(),
            _ => Ok(()),
        }
    }

    /// Whether labels of shape `shape` can be fed to this kernel.
    pub fn check_shape(&self, shape: LabelShape) -> Result<(), KernelError> {
        let mismatch = |detail: String| KernelError::ShapeMismatch {
            kernel: self.name(),
            detail,
        };
        match (self, shape) {
            (BaseKernel::ConstantOne | BaseKernel::KroneckerDelta { .. }, _) => Ok(()),
            (
                BaseKernel::SquareExponential { .. } | BaseKernel::CompactPolynomial { .. },
                LabelShape::Vector(d),
            ) if d >= 1 => Ok(()),
            (BaseKernel::Product(parts), LabelShape::Vector(d)) if d == parts.len() => parts
                .iter()
                .try_for_each(|k| k.check_shape(LabelShape::Vector(1))),
            (BaseKernel::Product(parts), s) => Err(mismatch(format!(
                "expects vector[{}] labels, got {s}",
                parts.len()
            ))),
            (BaseKernel::RConvolution(inner), LabelShape::Vector(d)) if d >= 1 => {
                inner.check_shape(LabelShape::Vector(1))
            }
            (_, s) => Err(mismatch(format!("cannot evaluate {s} labels"))),
        }
    }

    fn check_pair(&self, a: &Label, b: &Label) -> Result<(), KernelError> {
        self.check_shape(a.shape())?;
        self.check_shape(b.shape())?;
        let compatible = match (a.shape(), b.shape()) {
            (LabelShape::Vector(_), LabelShape::Vector(_))
                if matches!(self, BaseKernel::RConvolution(_)) =>
            {
                true
            }
            (sa, sb) => sa == sb || self.is_constant_one(),
        };
        if compatible {
            Ok(())
        } else {
            Err(KernelError::ShapeMismatch {
                kernel: self.name(),
                detail: format!("{} vs {}", a.shape(), b.shape()),
            })
        }
    }

    /// Evaluate on two labels, clamping the compact polynomial into `[0, 1]`.
    pub fn eval(&self, a: &Label, b: &Label) -> Result<f64, KernelError> {
        self.check_pair(a, b)?;
        Ok(self.value(a, b))
    }

    /// Evaluate and error when the raw value leaves the role's range instead
    /// of clamping.
    pub fn eval_strict(&self, role: KernelRole, a: &Label, b: &Label) -> Result<f64, KernelError> {
        self.check_pair(a, b)?;
        let raw = self.raw(a.into(), b.into());
        if role.admits(raw) {
            Ok(raw)
        } else {
            Err(KernelError::OutOfRange {
                kernel: self.name(),
                value: raw,
                range: role.range(),
            })
        }
    }

    /// Evaluate labels whose shapes were already checked.
    #[inline]
    pub(crate) fn value(&self, a: &Label, b: &Label) -> f64 {
        self.clamped(a.into(), b.into())
    }

    fn clamped(&self, a: LabelRef<'_>, b: LabelRef<'_>) -> f64 {
        self.raw(a, b).clamp(0.0, 1.0)
    }

    fn raw(&self, a: LabelRef<'_>, b: LabelRef<'_>) -> f64 {
        match self {
            BaseKernel::ConstantOne => 1.0,
            BaseKernel::KroneckerDelta { h } => {
                let equal = match (a, b) {
                    (LabelRef::Cat(x), LabelRef::Cat(y)) => x == y,
                    (LabelRef::Slice(x), LabelRef::Slice(y)) => x == y,
                    _ => false,
                };
                if equal {
                    1.0
                } else {
                    *h
                }
            }
            BaseKernel::SquareExponential { alpha } => match (a, b) {
                (LabelRef::Slice(x), LabelRef::Slice(y)) => (-alpha * sq_dist(x, y)).exp(),
                _ => 0.0,
            },
            BaseKernel::CompactPolynomial { coeffs } => match (a, b) {
                (LabelRef::Slice(x), LabelRef::Slice(y)) => {
                    let r = sq_dist(x, y).sqrt();
                    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
                }
                _ => 0.0,
            },
            BaseKernel::Product(parts) => match (a, b) {
                (LabelRef::Slice(x), LabelRef::Slice(y)) => parts
                    .iter()
                    .enumerate()
                    .map(|(k, kern)| {
                        kern.clamped(LabelRef::Slice(&x[k..=k]), LabelRef::Slice(&y[k..=k]))
                    })
                    .product(),
                _ => 0.0,
            },
            BaseKernel::RConvolution(inner) => match (a, b) {
                (LabelRef::Slice(x), LabelRef::Slice(y)) => {
                    // fixed operand order keeps the sum bit-symmetric
                    let (x, y) = if cmp_slices(x, y).is_le() { (x, y) } else { (y, x) };
                    let mut sum = 0.0;
                    for i in 0..x.len() {
                        for j in 0..y.len() {
                            sum += inner.clamped(
                                LabelRef::Slice(&x[i..=i]),
                                LabelRef::Slice(&y[j..=j]),
                            );
                        }
                    }
                    sum / (x.len() * y.len()) as f64
                }
                _ => 0.0,
            },
        }
    }

    /// Floating-point operations per evaluation on labels of `shape`, the
    /// `X` contribution of the kernel in the cost model.
    pub fn flop_count(&self, shape: LabelShape) -> u64 {
        let dim = match shape {
            LabelShape::Categorical => 1,
            LabelShape::Vector(d) => d as u64,
        };
        match self {
            BaseKernel::ConstantOne => 0,
            BaseKernel::KroneckerDelta { .. } => dim,
            // 3 multiplications and 1 exponentiation per scalar component
            BaseKernel::SquareExponential { .. } => 3 * dim + 1,
            BaseKernel::CompactPolynomial { coeffs } => {
                3 * dim + 2 * coeffs.len().saturating_sub(1) as u64
            }
            BaseKernel::Product(parts) => {
                parts
                    .iter()
                    .map(|k| k.flop_count(LabelShape::Vector(1)))
                    .sum::<u64>()
                    + parts.len().saturating_sub(1) as u64
            }
            BaseKernel::RConvolution(inner) => {
                dim * dim * (inner.flop_count(LabelShape::Vector(1)) + 1) + 1
            }
        }
    }
}

impl fmt::Display for BaseKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseKernel::ConstantOne => write!(f, "const1"),
            BaseKernel::KroneckerDelta { h } => write!(f, "delta:{h}"),
            BaseKernel::SquareExponential { alpha } => write!(f, "se:{alpha}"),
            BaseKernel::CompactPolynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(f64::to_string).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            BaseKernel::Product(parts) => {
                let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "prod({})", parts.join(";"))
            }
            BaseKernel::RConvolution(inner) => write!(f, "rconv({inner})"),
        }
    }
}

impl FromStr for BaseKernel {
    type Err = KernelError;

    /// Parse `const1`, `delta:H`, `se:ALPHA` or `poly:C0,C1,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KernelError::BadKernelString(s.to_string());
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        let kernel = match s.split_once(':') {
            None if s == "const1" => BaseKernel::ConstantOne,
            Some(("delta", h)) => BaseKernel::KroneckerDelta { h: num(h)? },
            Some(("se", a)) => BaseKernel::SquareExponential { alpha: num(a)? },
            Some(("poly", cs)) => BaseKernel::CompactPolynomial {
                coeffs: cs.split(',').map(num).collect::<Result<_, _>>()?,
            },
            _ => return Err(bad()),
        };
        kernel.check_parameters()?;
        Ok(kernel)
    }
}
