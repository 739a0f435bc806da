//! Random training stencils.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neural::features::{structured_stencil, FeatureSpec};
use crate::neural::io::{spec_from_str, spec_to_string};
use crate::points::PointSet;

/// Bounds of the 2D cell sides `a`, `b`.
pub const CELL_SIDE_MIN: f64 = 0.01;
pub const CELL_SIDE_MAX: f64 = 1.0;

const DATASET_HEADER: &str = "# rbfshapenet dataset v1";

/// Train and validation stencils plus the feature spec fitted on the
/// training split.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub spec: FeatureSpec,
    pub train: Vec<PointSet>,
    pub valid: Vec<PointSet>,
}

impl Dataset {
    /// Draws `n_train + n_valid` stencils from one seeded stream, training
    /// samples first, then fits the statistics of `spec` on the training
    /// split.
    pub fn generate(spec: FeatureSpec, n_train: usize, n_valid: usize, seed: u64) -> Result<Self> {
        if n_train == 0 || n_valid == 0 {
            return Err(Error::InvalidArgument("dataset splits must be non-empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |count: usize| -> Result<Vec<PointSet>> {
            (0..count).map(|_| random_stencil(&spec, &mut rng)).collect()
        };
        let train = draw(n_train)?;
        let valid = draw(n_valid)?;
        Dataset::from_splits(spec, train, valid)
    }

    /// Refits the statistics on `train`.
    pub fn from_splits(spec: FeatureSpec, train: Vec<PointSet>, valid: Vec<PointSet>) -> Result<Self> {
        let raw = train
            .iter()
            .map(|s| spec.raw_features(s))
            .collect::<Result<Vec<_>>>()?;
        let spec = spec.fit(&raw)?;
        for s in &valid {
            spec.raw_features(s)?;
        }
        Ok(Dataset { spec, train, valid })
    }

    pub fn train_features(&self) -> Result<Vec<Vec<f64>>> {
        self.train.iter().map(|s| self.spec.features(s)).collect()
    }

    pub fn valid_features(&self) -> Result<Vec<Vec<f64>>> {
        self.valid.iter().map(|s| self.spec.features(s)).collect()
    }

    /// One record per line: `train` or `valid`, then raw coordinates
    /// (`x` in 1D, `x y` pairs in 2D).
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{DATASET_HEADER}\n# dim {} stencil_size {}\n",
            self.spec.dim, self.spec.stencil_size
        );
        for (tag, split) in [("train", &self.train), ("valid", &self.valid)] {
            for s in split {
                out.push_str(tag);
                for p in s.coords() {
                    write!(out, " {:?}", p[0]).unwrap();
                    if s.dim() == 2 {
                        write!(out, " {:?}", p[1]).unwrap();
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses [`Dataset::to_text`] output and refits `spec` on the training
    /// records.
    pub fn from_text(text: &str, spec: FeatureSpec) -> Result<Self> {
        let mut train = Vec::new();
        let mut valid = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::InvalidArgument(format!("dataset line {}: {msg}", lineno + 1));
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or_default();
            let vals = it
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != spec.dim * spec.stencil_size {
                return Err(bad("wrong number of coordinates"));
            }
            let stencil = if spec.dim == 1 {
                PointSet::new_1d(&vals)?
            } else {
                PointSet::new_2d(vals.chunks(2).map(|c| [c[0], c[1]]).collect())?
            };
            match tag {
                "train" => train.push(stencil),
                "valid" => valid.push(stencil),
                _ => return Err(bad("record must start with `train` or `valid`")),
            }
        }
        if train.is_empty() {
            return Err(Error::InvalidArgument("dataset has no training records".into()));
        }
        Dataset::from_splits(spec, train, valid)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path, spec: FeatureSpec) -> Result<Self> {
        Dataset::from_text(&fs::read_to_string(path)?, spec)
    }

    /// Writes `train.txt`, `valid.txt` and the `stats.txt` sidecar into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let text = self.to_text();
        let (head, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
        for tag in ["train", "valid"] {
            let mut out = head.join("\n");
            out.push('\n');
            for l in body.iter().filter(|l| l.split_whitespace().next() == Some(tag)) {
                out.push_str(l);
                out.push('\n');
            }
            fs::write(dir.join(format!("{tag}.txt")), out)?;
        }
        fs::write(dir.join("stats.txt"), spec_to_string(&self.spec))?;
        Ok(())
    }

    /// Reads a directory written by [`Dataset::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let spec = spec_from_str(&fs::read_to_string(dir.join("stats.txt"))?)?;
        let mut text = fs::read_to_string(dir.join("train.txt"))?;
        text.push_str(&fs::read_to_string(dir.join("valid.txt"))?);
        Dataset::from_text(&text, spec)
    }
}

/// One random stencil: `n` sorted uniform points on `[0, 1]` in 1D, or a
/// structured 3×3 stencil with `dx = b/2`, `dy = a/2` in 2D.
pub fn random_stencil<R: Rng>(spec: &FeatureSpec, rng: &mut R) -> Result<PointSet> {
    if spec.dim == 1 {
        loop {
            let mut xs: Vec<f64> = (0..spec.stencil_size).map(|_| rng.gen::<f64>()).collect();
            xs.sort_by(f64::total_cmp);
            // exact duplicates are astronomically rare but would be a zero gap
            if xs.windows(2).all(|w| w[1] > w[0]) {
                return PointSet::new_1d(&xs);
            }
        }
    } else if spec.mode == crate::neural::features::FeatureMode::DistanceBased {
        let a = rng.gen_range(CELL_SIDE_MIN..=CELL_SIDE_MAX);
        let b = rng.gen_range(CELL_SIDE_MIN..=CELL_SIDE_MAX);
        Ok(structured_stencil(b / 2.0, a / 2.0))
    } else {
        let pts: Vec<_> = (0..spec.stencil_size).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        PointSet::new_2d(pts)
    }
}

/// Shuffled minibatch index lists for one epoch.
pub fn minibatches<R: Rng>(len: usize, batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(rng);
    idx.chunks(batch_size.max(1)).map(|c| c.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::features::{DistanceTransform, FeatureMode};

    fn spec1() -> FeatureSpec {
        FeatureSpec::new(1, FeatureMode::DistanceBased, DistanceTransform::Inverse, 10).unwrap()
    }

    #[test]
    fn deterministic() {
        let a = Dataset::generate(spec1(), 50, 20, 9).unwrap();
        let b = Dataset::generate(spec1(), 50, 20, 9).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.spec, b.spec);
        let c = Dataset::generate(spec1(), 50, 20, 10).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn splits_are_distinct_draws() {
        let d = Dataset::generate(spec1(), 40, 40, 1).unwrap();
        for v in &d.valid {
            assert!(d.train.iter().all(|t| t != v));
        }
        for s in d.train.iter().chain(&d.valid) {
            let xs = s.xs();
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
            assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn standardized_training_mean_is_zero() {
        let d = Dataset::generate(spec1(), 300, 10, 4).unwrap();
        let f = d.train_features().unwrap();
        for j in 0..d.spec.input_dim() {
            let m = f.iter().map(|r| r[j]).sum::<f64>() / f.len() as f64;
            assert!(m.abs() < 1e-10, "feature {j}: {m}");
        }
    }

    #[test]
    fn structured_2d_samples() {
        let spec = FeatureSpec::new(2, FeatureMode::DistanceBased, DistanceTransform::Inverse, 9).unwrap();
        let d = Dataset::generate(spec, 30, 5, 2).unwrap();
        for s in &d.train {
            let (dx, dy) = crate::neural::features::structured_spacing(s).unwrap();
            assert!((CELL_SIDE_MIN / 2.0..=CELL_SIDE_MAX / 2.0).contains(&dx));
            assert!((CELL_SIDE_MIN / 2.0..=CELL_SIDE_MAX / 2.0).contains(&dy));
        }
    }

    #[test]
    fn text_roundtrip() {
        let d = Dataset::generate(spec1(), 20, 5, 3).unwrap();
        let back = Dataset::from_text(&d.to_text(), spec1()).unwrap();
        assert_eq!(back.train, d.train);
        assert_eq!(back.valid, d.valid);
        assert_eq!(back.spec, d.spec);
    }

    #[test]
    fn directory_round_trip() {
        let d = Dataset::generate(spec1(), 30, 10, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        d.save_dir(dir.path()).unwrap();
        let back = Dataset::load_dir(dir.path()).unwrap();
        assert_eq!(back.to_text(), d.to_text());
        assert_eq!(back.spec, d.spec);
    }

    #[test]
    fn minibatch_cover() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = minibatches(1050, 500, &mut rng);
        assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![500, 500, 50]);
        let mut all: Vec<usize> = b.concat();
        all.sort();
        assert_eq!(all, (0..1050).collect::<Vec<_>>());
    }
}
