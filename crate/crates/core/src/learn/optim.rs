//! Parameter update rules for [`Mlp`].

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;

use super::mlp::{Gradients, Mlp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    /// `θ ← θ − lr·g`.
    #[default]
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            _ => Err(Error::Config(alloc::format!("unknown optimizer `{s}`"))),
        }
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Optimizer state for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Self {
            kind,
            lr,
            m: Vec::new(),
            v: Vec::new(),
            t: 0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        match self.kind {
            OptimizerKind::Sgd => net.sgd_step(grads, self.lr),
            OptimizerKind::Adam => {
                let g = grads.flatten();
                if self.m.len() != g.len() {
                    self.m = alloc::vec![0.0; g.len()];
                    self.v = alloc::vec![0.0; g.len()];
                    self.t = 0;
                }
                self.t += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                let c2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                for (((p, gi), m), v) in net.params_mut().zip(&g).zip(&mut self.m).zip(&mut self.v) {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * gi;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * gi * gi;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::mlp::Head;

    #[test]
    fn first_adam_step_moves_each_parameter_by_lr() {
        let mut net = Mlp::new(&[2, 3, 1], Head::Linear, 1).unwrap();
        let before = net.parameters();
        let trace = net.forward_trace(&[0.5, -1.0]).unwrap();
        let g = net.backward(&trace, &[10.0]).unwrap();
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01);
        opt.step(&mut net, &g);
        for ((a, b), gi) in before.iter().zip(net.parameters()).zip(g.flatten()) {
            if gi != 0.0 {
                assert!(((a - b).abs() - 0.01).abs() < 1e-6);
                assert_eq!((a - b).signum(), gi.signum());
            } else {
                assert_eq!(*a, b);
            }
        }
    }

    #[test]
    fn sgd_matches_plain_step() {
        let mut a = Mlp::new(&[2, 2], Head::Linear, 3).unwrap();
        let mut b = a.clone();
        let trace = a.forward_trace(&[1.0, 2.0]).unwrap();
        let g = a.backward(&trace, &[1.0, -1.0]).unwrap();
        Optimizer::new(OptimizerKind::Sgd, 0.1).step(&mut a, &g);
        b.sgd_step(&g, 0.1);
        assert_eq!(a, b);
        assert_eq!("adam".parse::<OptimizerKind>().unwrap(), OptimizerKind::Adam);
    }
}
