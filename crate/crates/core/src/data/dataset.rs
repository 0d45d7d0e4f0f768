//! Dataset specs and the cached loaders behind them. A spec fully determines
//! its dataset: loading first checks the content-addressed cache and only
//! generates (then stores) the data on a miss, byte for byte reproducibly.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{OrientationFlip, SimplicialComplex};
use crate::nn::CochainFeatures;
use crate::tensor::Tensor;

use super::cache::{self, ByteReader, ByteWriter};
use super::idx::{read_idx_images, read_idx_labels};
use super::mesh::{MeshSpec, TriangulatedMesh};
use super::slic::SlicParams;
use super::superpixel::{superpixel_sample, SuperpixelSample};
use super::trajectory::{make_trajectory_split, TrajectorySample};
use super::DataError;

const SUPERPIXEL_MAGIC: &[u8; 8] = b"SATSPX1\n";
const TRAJECTORY_MAGIC: &[u8; 8] = b"SATTRJ1\n";

/// Everything needed to materialize a dataset, in the shape experiment
/// configs embed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Superpixel(SuperpixelSpec),
    Trajectory(TrajectorySpec),
}

impl DatasetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DatasetSpec::Superpixel(_) => "superpixel",
            DatasetSpec::Trajectory(_) => "trajectory",
        }
    }

    pub fn cache_dir(&self, root: &Path) -> PathBuf {
        let hash = match self {
            DatasetSpec::Superpixel(spec) => cache::spec_hash(spec),
            DatasetSpec::Trajectory(spec) => cache::spec_hash(spec),
        };
        cache::entry_dir(root, self.kind(), &hash)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SuperpixelSpec {
    #[serde(default = "default_sp_train")]
    pub train: usize,
    #[serde(default = "default_sp_val")]
    pub val: usize,
    #[serde(default = "default_sp_test")]
    pub test: usize,
    #[serde(default = "default_clusters")]
    pub clusters: usize,
    #[serde(default = "default_compactness")]
    pub compactness: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Directory holding the four IDX files; falls back to `SAT_MNIST_DIR`,
    /// then `./data/mnist`.
    #[serde(default)]
    pub mnist_dir: Option<PathBuf>,
}

fn default_sp_train() -> usize {
    5000
}

fn default_sp_val() -> usize {
    1000
}

fn default_sp_test() -> usize {
    2000
}

fn default_clusters() -> usize {
    75
}

fn default_compactness() -> f64 {
    0.25
}

fn default_iterations() -> usize {
    10
}

impl Default for SuperpixelSpec {
    fn default() -> Self {
        SuperpixelSpec {
            train: default_sp_train(),
            val: default_sp_val(),
            test: default_sp_test(),
            clusters: default_clusters(),
            compactness: default_compactness(),
            iterations: default_iterations(),
            mnist_dir: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrajectorySpec {
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default = "default_tj_train")]
    pub train: usize,
    #[serde(default = "default_tj_test")]
    pub test: usize,
    #[serde(default)]
    pub split_seed: u64,
}

fn default_tj_train() -> usize {
    1000
}

fn default_tj_test() -> usize {
    200
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec {
            mesh: MeshSpec::default(),
            train: default_tj_train(),
            test: default_tj_test(),
            split_seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuperpixelDataset {
    pub train: Vec<SuperpixelSample>,
    pub val: Vec<SuperpixelSample>,
    pub test: Vec<SuperpixelSample>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryDataset {
    pub mesh: TriangulatedMesh,
    pub train: Vec<TrajectorySample>,
    pub test: Vec<TrajectorySample>,
}

impl SuperpixelSpec {
    pub fn load_or_build(&self, cache_root: &Path) -> Result<SuperpixelDataset, DataError> {
        let dir = cache::entry_dir(cache_root, "superpixel", &cache::spec_hash(self));
        if let Some(bytes) = cache::read_entry(&dir)? {
            return decode_superpixel(&bytes);
        }
        let dataset = self.build()?;
        cache::write_entry(&dir, self, &encode_superpixel(&dataset))?;
        Ok(dataset)
    }

    pub fn build(&self) -> Result<SuperpixelDataset, DataError> {
        let dir = resolve_mnist_dir(&self.mnist_dir);
        let params = SlicParams {
            clusters: self.clusters,
            compactness: self.compactness,
            iterations: self.iterations,
        };

        let mut train_pool = mnist_samples(
            &dir.join("train-images-idx3-ubyte"),
            &dir.join("train-labels-idx1-ubyte"),
            self.train + self.val,
            &params,
        )?;
        let val = train_pool.split_off(self.train);
        let test = mnist_samples(
            &dir.join("t10k-images-idx3-ubyte"),
            &dir.join("t10k-labels-idx1-ubyte"),
            self.test,
            &params,
        )?;
        Ok(SuperpixelDataset { train: train_pool, val, test })
    }
}

impl TrajectorySpec {
    pub fn load_or_build(&self, cache_root: &Path) -> Result<TrajectoryDataset, DataError> {
        let dir = cache::entry_dir(cache_root, "trajectory", &cache::spec_hash(self));
        if let Some(bytes) = cache::read_entry(&dir)? {
            return decode_trajectory(&bytes);
        }
        let dataset = self.build()?;
        cache::write_entry(&dir, self, &encode_trajectory(&dataset))?;
        Ok(dataset)
    }

    pub fn build(&self) -> Result<TrajectoryDataset, DataError> {
        let mesh = self.mesh.build()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.split_seed);
        let (train, test) = make_trajectory_split(&mesh, self.train, self.test, &mut rng)?;
        Ok(TrajectoryDataset { mesh, train, test })
    }
}

fn resolve_mnist_dir(configured: &Option<PathBuf>) -> PathBuf {
    configured
        .clone()
        .or_else(|| std::env::var_os("SAT_MNIST_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}

/// Reads IDX files and segments `want` images, visiting classes round-robin
/// in file order so any prefix is as class-balanced as the files allow.
/// Images whose segmentation collapses are skipped.
fn mnist_samples(
    images_path: &Path,
    labels_path: &Path,
    want: usize,
    params: &SlicParams,
) -> Result<Vec<SuperpixelSample>, DataError> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(DataError::CountMismatch { images: images.len(), labels: labels.len() });
    }

    let mut buckets: BTreeMap<u8, VecDeque<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        buckets.entry(label).or_default().push_back(i);
    }

    let mut samples = Vec::with_capacity(want);
    let mut remaining: usize = buckets.values().map(|b| b.len()).sum();
    while samples.len() < want && remaining > 0 {
        for bucket in buckets.values_mut() {
            if samples.len() == want {
                break;
            }
            let Some(i) = bucket.pop_front() else {
                continue;
            };
            remaining -= 1;
            match superpixel_sample(&images[i], labels[i] as usize, params) {
                Ok(sample) => samples.push(sample),
                Err(DataError::ClusterCount { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if samples.len() < want {
        return Err(DataError::NotEnough { need: want, have: samples.len() });
    }
    Ok(samples)
}

fn encode_features(w: &mut ByteWriter, features: &CochainFeatures) {
    let dims: Vec<usize> = features.dims().collect();
    w.u64(dims.len() as u64);
    for dim in dims {
        let tensor = features.get(dim).expect("dim listed");
        w.u64(dim as u64);
        w.u64(tensor.rows() as u64);
        w.u64(tensor.cols() as u64);
        for &v in tensor.data() {
            w.f64(v);
        }
    }
}

fn decode_features(r: &mut ByteReader) -> Result<CochainFeatures, DataError> {
    let mut features = CochainFeatures::new();
    let n_dims = r.usize("feature dim count")?;
    for _ in 0..n_dims {
        let dim = r.usize("feature dim")?;
        let rows = r.usize("feature rows")?;
        let cols = r.usize("feature cols")?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(r.f64("feature value")?);
        }
        let tensor = Tensor::new(rows, cols, data)
            .map_err(|e| DataError::BadCache(format!("feature tensor: {e}")))?;
        features.insert(dim, tensor);
    }
    Ok(features)
}

fn encode_superpixel(dataset: &SuperpixelDataset) -> Vec<u8> {
    let mut w = ByteWriter::new(SUPERPIXEL_MAGIC);
    for split in [&dataset.train, &dataset.val, &dataset.test] {
        w.u64(split.len() as u64);
        for sample in split {
            w.u8(sample.label as u8);
            w.str(&sample.complex.to_text());
            encode_features(&mut w, &sample.features);
        }
    }
    w.finish()
}

fn decode_superpixel(bytes: &[u8]) -> Result<SuperpixelDataset, DataError> {
    let mut r = ByteReader::new(bytes, SUPERPIXEL_MAGIC)?;
    let mut splits = Vec::with_capacity(3);
    for _ in 0..3 {
        let count = r.usize("sample count")?;
        let mut split = Vec::with_capacity(count);
        for _ in 0..count {
            let label = r.u8("label")? as usize;
            let text = r.str("complex")?;
            let complex = SimplicialComplex::from_text(&text)
                .map_err(|e| DataError::BadCache(format!("complex: {e}")))?;
            let features = decode_features(&mut r)?;
            split.push(SuperpixelSample { complex, features, label });
        }
        splits.push(split);
    }
    r.expect_end()?;
    let test = splits.pop().expect("three splits");
    let val = splits.pop().expect("three splits");
    let train = splits.pop().expect("three splits");
    Ok(SuperpixelDataset { train, val, test })
}

fn encode_trajectory(dataset: &TrajectoryDataset) -> Vec<u8> {
    let mut w = ByteWriter::new(TRAJECTORY_MAGIC);
    w.u64(dataset.mesh.points.len() as u64);
    for &(x, y) in &dataset.mesh.points {
        w.f64(x);
        w.f64(y);
    }
    w.str(&dataset.mesh.complex.to_text());
    for split in [&dataset.train, &dataset.test] {
        w.u64(split.len() as u64);
        for sample in split {
            w.u8(sample.label as u8);
            w.u64(sample.route.len() as u64);
            for &v in &sample.route {
                w.u64(v as u64);
            }
            w.u64(sample.chain.len() as u64);
            for &c in &sample.chain {
                w.i8(c as i8);
            }
            for &s in sample.flip.signs() {
                w.i8(s);
            }
        }
    }
    w.finish()
}

fn decode_trajectory(bytes: &[u8]) -> Result<TrajectoryDataset, DataError> {
    let mut r = ByteReader::new(bytes, TRAJECTORY_MAGIC)?;
    let n_points = r.usize("point count")?;
    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        points.push((r.f64("point x")?, r.f64("point y")?));
    }
    let text = r.str("complex")?;
    let complex = SimplicialComplex::from_text(&text)
        .map_err(|e| DataError::BadCache(format!("complex: {e}")))?;
    let mesh = TriangulatedMesh { complex, points };

    let mut splits = Vec::with_capacity(2);
    for _ in 0..2 {
        let count = r.usize("sample count")?;
        let mut split = Vec::with_capacity(count);
        for _ in 0..count {
            let label = r.u8("label")? as usize;
            let route_len = r.usize("route length")?;
            let mut route = Vec::with_capacity(route_len);
            for _ in 0..route_len {
                route.push(r.usize("route vertex")?);
            }
            let n_edges = r.usize("edge count")?;
            let mut chain = Vec::with_capacity(n_edges);
            for _ in 0..n_edges {
                chain.push(f64::from(r.i8("chain entry")?));
            }
            let mut signs = Vec::with_capacity(n_edges);
            for _ in 0..n_edges {
                signs.push(r.i8("flip sign")?);
            }
            let flip = OrientationFlip::new(1, signs)
                .map_err(|e| DataError::BadCache(format!("flip: {e}")))?;
            split.push(TrajectorySample { chain, label, route, flip });
        }
        splits.push(split);
    }
    r.expect_end()?;
    let test = splits.pop().expect("two splits");
    let train = splits.pop().expect("two splits");
    Ok(TrajectoryDataset { mesh, train, test })
}
