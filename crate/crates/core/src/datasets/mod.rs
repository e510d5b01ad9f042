//! Loading, preprocessing and splitting of the image datasets.
//!
//! Expected layout under the data directory:
//!
//! ```text
//! mnist/{train,t10k}-images-idx3-ubyte   mnist/{train,t10k}-labels-idx1-ubyte
//! fashion/{train,t10k}-images-idx3-ubyte fashion/{train,t10k}-labels-idx1-ubyte
//! cifar-10-batches-bin/data_batch_{1..5}.bin  cifar-10-batches-bin/test_batch.bin
//! ```

mod cifar;
mod idx;
mod preprocess;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use cifar::{load_cifar_binary, parse_cifar, RECORD_BYTES};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IMAGE_MAGIC, LABEL_MAGIC};
pub use preprocess::{avg_pool, filter_classes, resize_bilinear, split, subsample};

use crate::error::{QdeqError, Result};

/// Environment variable naming the data directory when no flag is given.
pub const DATA_DIR_ENV: &str = "QDEQ_DATA_DIR";

/// Fraction of the training file kept for training; the rest is validation.
pub const TRAIN_FRACTION: f64 = 0.8;

/// Labels kept by the four-class MNIST task.
pub const MNIST4_CLASSES: [usize; 4] = [0, 3, 6, 9];

/// Flattened row-major images with pixel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub height: usize,
    pub width: usize,
    pub num_classes: usize,
}

impl ImageDataset {
    pub fn new(images: Vec<Vec<f64>>, labels: Vec<usize>, height: usize, width: usize, num_classes: usize) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(QdeqError::Length(format!("{} images but {} labels", images.len(), labels.len())));
        }
        if let Some(bad) = images.iter().position(|img| img.len() != height * width) {
            return Err(QdeqError::Length(format!("image {bad} is not {height}x{width}")));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(QdeqError::Format(format!("label {bad} outside {num_classes} classes")));
        }
        Ok(Self {
            images,
            labels,
            height,
            width,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> ImageDataset {
        ImageDataset {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            height: self.height,
            width: self.width,
            num_classes: self.num_classes,
        }
    }

    /// Applies `f` to every image; `f` must produce `height x width` images.
    pub fn map_images<F>(&self, height: usize, width: usize, f: F) -> Result<ImageDataset>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let images = self.images.iter().map(|img| f(img)).collect::<Result<Vec<_>>>()?;
        ImageDataset::new(images, self.labels.clone(), height, width, self.num_classes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    /// MNIST digits 0, 3, 6, 9 average-pooled to 4x4.
    Mnist4,
    /// MNIST resized to 10x10.
    Mnist10,
    /// FashionMNIST resized to 10x10.
    FashionMnist10,
    /// CIFAR-10 in grayscale resized to 10x10.
    Cifar10,
}

impl DatasetName {
    pub fn num_classes(self) -> usize {
        match self {
            DatasetName::Mnist4 => 4,
            _ => 10,
        }
    }

    /// Flattened input length after preprocessing.
    pub fn input_dim(self) -> usize {
        match self {
            DatasetName::Mnist4 => 16,
            _ => 100,
        }
    }

    /// Raw `(train, test)` files as distributed.
    pub fn load_raw(self, data_dir: &Path) -> Result<(ImageDataset, ImageDataset)> {
        match self {
            DatasetName::Mnist4 | DatasetName::Mnist10 => load_idx_pair(&data_dir.join("mnist")),
            DatasetName::FashionMnist10 => load_idx_pair(&data_dir.join("fashion")),
            DatasetName::Cifar10 => {
                let dir = data_dir.join("cifar-10-batches-bin");
                let mut train = load_cifar_binary(dir.join("data_batch_1.bin"))?;
                for i in 2..=5 {
                    let more = load_cifar_binary(dir.join(format!("data_batch_{i}.bin")))?;
                    train.images.extend(more.images);
                    train.labels.extend(more.labels);
                }
                Ok((train, load_cifar_binary(dir.join("test_batch.bin"))?))
            }
        }
    }

    /// Filtering and resizing for this task.
    pub fn preprocess(self, raw: &ImageDataset) -> Result<ImageDataset> {
        match self {
            DatasetName::Mnist4 => {
                let filtered = filter_classes(raw, &MNIST4_CLASSES)?;
                filtered.map_images(4, 4, |img| avg_pool(img, raw.height, 4))
            }
            _ => raw.map_images(10, 10, |img| resize_bilinear(img, raw.height, raw.width, 10, 10)),
        }
    }

    /// Whether the files for this dataset are present under `data_dir`.
    pub fn available(self, data_dir: &Path) -> bool {
        let probe = match self {
            DatasetName::Mnist4 | DatasetName::Mnist10 => data_dir.join("mnist/train-images-idx3-ubyte"),
            DatasetName::FashionMnist10 => data_dir.join("fashion/train-images-idx3-ubyte"),
            DatasetName::Cifar10 => data_dir.join("cifar-10-batches-bin/test_batch.bin"),
        };
        probe.is_file()
    }
}

impl std::fmt::Display for DatasetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DatasetName::Mnist4 => "mnist4",
            DatasetName::Mnist10 => "mnist10",
            DatasetName::FashionMnist10 => "fashion_mnist10",
            DatasetName::Cifar10 => "cifar10",
        };
        f.write_str(s)
    }
}

fn load_idx_pair(dir: &Path) -> Result<(ImageDataset, ImageDataset)> {
    let train = load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?;
    let test = load_idx(dir.join("t10k-images-idx3-ubyte"), dir.join("t10k-labels-idx1-ubyte"))?;
    Ok((train, test))
}

/// Preprocessed train/validation/test sets of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: DatasetName,
    pub train: ImageDataset,
    pub val: ImageDataset,
    pub test: ImageDataset,
}

/// Optional caps on the number of samples used.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubsetSizes {
    /// Samples drawn from the training file before the train/validation split.
    pub train: Option<usize>,
    pub test: Option<usize>,
}

impl DatasetBundle {
    /// Loads and preprocesses `name`, splitting the training file 80/20.
    ///
    /// Split and subsampling draw from the `"data-split"` stream of `seed`.
    pub fn load(name: DatasetName, data_dir: &Path, seed: u64, subsets: SubsetSizes) -> Result<Self> {
        let (raw_train, raw_test) = name.load_raw(data_dir)?;
        Self::from_raw(name, &raw_train, &raw_test, seed, subsets)
    }

    pub fn from_raw(
        name: DatasetName,
        raw_train: &ImageDataset,
        raw_test: &ImageDataset,
        seed: u64,
        subsets: SubsetSizes,
    ) -> Result<Self> {
        let mut rng = crate::rng::stream(seed, "data-split");
        let mut pool = name.preprocess(raw_train)?;
        let mut test = name.preprocess(raw_test)?;
        if let Some(n) = subsets.train {
            pool = subsample(&pool, n, &mut rng);
        }
        if let Some(n) = subsets.test {
            test = subsample(&test, n, &mut rng);
        }
        let (train, val) = split(&pool, TRAIN_FRACTION, &mut rng)?;
        Ok(Self { name, train, val, test })
    }
}

/// The data directory from an explicit flag, else from `QDEQ_DATA_DIR`.
pub fn resolve_data_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}
