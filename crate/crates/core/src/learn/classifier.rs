//! Small image classifier: an MLP on grayscale pixels trained with
//! mini-batch SGD on softmax cross-entropy. Serves both as the reference
//! classifier for operability labels and as the evaluation model.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::mlp::{Gradients, Head, Mlp};
use crate::image::{to_grayscale, Image, SampleSet};
use crate::rng::{mix, rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierHp {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierHp {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![64],
            epochs: 15,
            learning_rate: 0.05,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    net: Mlp,
}

/// Network input: grayscale pixels shifted to be centered on zero.
pub fn pixel_input(img: &Image) -> Vec<f64> {
    to_grayscale(img).data().iter().map(|v| v - 0.5).collect()
}

impl Classifier {
    pub fn from_net(net: Mlp) -> Result<Self> {
        if net.head() != Head::Softmax {
            return Err(Error::InvalidArgument("classifier network needs a softmax head".into()));
        }
        Ok(Self { net })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn classes(&self) -> usize {
        self.net.output_dim()
    }

    pub fn train(set: &SampleSet, classes: usize, hp: &ClassifierHp) -> Result<Self> {
        let labels = set
            .labels()
            .ok_or_else(|| Error::InvalidArgument("training set needs labels".into()))?;
        let (w, h, _) = set.shape().ok_or(Error::EmptyBatch)?;
        if labels.iter().any(|&l| l as usize >= classes) {
            return Err(Error::InvalidArgument("label outside the class range".into()));
        }
        if hp.batch_size == 0 || !(hp.learning_rate > 0.0) {
            return Err(Error::Config("batch size and learning rate must be positive".into()));
        }
        let mut sizes = alloc::vec![w * h];
        sizes.extend_from_slice(&hp.hidden);
        sizes.push(classes);
        let mut net = Mlp::new(&sizes, Head::Softmax, hp.seed)?;
        let inputs: Vec<Vec<f64>> = set.images().iter().map(pixel_input).collect();
        let mut order: Vec<usize> = (0..set.len()).collect();
        for epoch in 0..hp.epochs {
            order.shuffle(&mut rng(mix(hp.seed, epoch as u64)));
            for chunk in order.chunks(hp.batch_size) {
                let mut acc = Gradients::zeros_like(&net);
                for &i in chunk {
                    let trace = net.forward_trace(&inputs[i])?;
                    let mut g = trace.output().to_vec();
                    g[labels[i] as usize] -= 1.0;
                    acc.add_scaled(&net.backward_logits(&trace, &g)?, 1.0 / chunk.len() as f64);
                }
                net.sgd_step(&acc, hp.learning_rate);
            }
            if !net.is_finite() {
                return Err(Error::Diverged { episode: epoch, step: 0 });
            }
        }
        Ok(Self { net })
    }

    pub fn predict(&self, img: &Image) -> Result<u32> {
        let p = self.net.forward(&pixel_input(img))?;
        let best = p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        Ok(best.0 as u32)
    }

    pub fn accuracy(&self, set: &SampleSet) -> Result<f64> {
        let labels = set
            .labels()
            .ok_or_else(|| Error::InvalidArgument("evaluation set needs labels".into()))?;
        if set.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut correct = 0usize;
        for (img, &y) in set.images().iter().zip(labels) {
            if self.predict(img)? == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / set.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synth_dataset;

    #[test]
    fn learns_the_shapes() {
        let train = synth_dataset(400, 16, 4, 1).unwrap();
        let test = synth_dataset(200, 16, 4, 2).unwrap();
        let hp = ClassifierHp {
            epochs: 10,
            ..ClassifierHp::default()
        };
        let clf = Classifier::train(&train, 4, &hp).unwrap();
        assert!(clf.accuracy(&test).unwrap() > 0.85);
    }
}
