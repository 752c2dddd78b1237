// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use super::ModelError;

/// A value that may change at fixed times.
///
/// `PiecewiseConstant` with breakpoints `b_0 < b_1 < ... < b_{k-1}` holds
/// `k + 1` values: `values[0]` on `(-inf, b_0)`, `values[i]` on
/// `[b_{i-1}, b_i)`, and `values[k]` from `b_{k-1}` on.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule<T> {
    Constant(T),
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<T>,
    },
}

impl<T> Schedule<T> {
    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<T>) -> Result<Self, ModelError> {
        let s = Schedule::PiecewiseConstant {
            breakpoints,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if let Schedule::PiecewiseConstant {
            breakpoints,
            values,
        } = self
        {
            if values.len() != breakpoints.len() + 1 {
                return Err(ModelError::InvalidSchedule(format!(
                    "{} breakpoints need {} values, got {}",
                    breakpoints.len(),
                    breakpoints.len() + 1,
                    values.len()
                )));
            }
            if breakpoints.iter().any(|b| !b.is_finite()) {
                return Err(ModelError::InvalidSchedule("non-finite breakpoint".into()));
            }
            if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ModelError::InvalidSchedule(
                    "breakpoints must be strictly ascending".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        match self {
            Schedule::Constant(_) => &[],
            Schedule::PiecewiseConstant { breakpoints, .. } => breakpoints,
        }
    }

    pub fn values(&self) -> &[T] {
        match self {
            Schedule::Constant(v) => std::slice::from_ref(v),
            Schedule::PiecewiseConstant { values, .. } => values,
        }
    }

    /// Value in force at time `t`.
    pub fn at(&self, t: f64) -> &T {
        match self {
            Schedule::Constant(v) => v,
            Schedule::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                &values[k]
            }
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Schedule<U> {
        match self {
            Schedule::Constant(v) => Schedule::Constant(f(v)),
            Schedule::PiecewiseConstant {
                breakpoints,
                values,
            } => Schedule::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(f).collect(),
            },
        }
    }
}

impl<T> From<T> for Schedule<T> {
    fn from(v: T) -> Self {
        Schedule::Constant(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_open_intervals() {
        let s = Schedule::piecewise(vec![1.0, 2.0], vec!['a', 'b', 'c']).unwrap();
        assert_eq!(*s.at(-5.0), 'a');
        assert_eq!(*s.at(0.999), 'a');
        assert_eq!(*s.at(1.0), 'b');
        assert_eq!(*s.at(1.999), 'b');
        assert_eq!(*s.at(2.0), 'c');
        assert_eq!(*s.at(1e9), 'c');
        assert_eq!(*Schedule::Constant(7).at(3.0), 7);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Schedule::piecewise(vec![1.0, 1.0], vec![0, 1, 2]).is_err());
        assert!(Schedule::piecewise(vec![2.0, 1.0], vec![0, 1, 2]).is_err());
        assert!(Schedule::piecewise(vec![1.0], vec![0]).is_err());
        assert!(Schedule::piecewise(vec![f64::NAN], vec![0, 1]).is_err());
    }
}
