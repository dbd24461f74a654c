//! CSV dataset files: header `label,x0,...,xD`, optionally gzip-compressed
//! when the path ends in `.gz`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use super::{Dataset, PointMatrix, Targets, Task};
use crate::error::{Error, Result};
use crate::geometry::{
    from_klein, from_poincare, to_klein, to_poincare, GeometryKind, ManifoldSpec, Strictness,
};

/// Coordinate system of the numeric columns in a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordSystem {
    #[default]
    Hyperboloid,
    Poincare,
    Klein,
}

impl CoordSystem {
    fn column_prefix(self) -> char {
        match self {
            CoordSystem::Hyperboloid => 'x',
            CoordSystem::Poincare => 'p',
            CoordSystem::Klein => 'k',
        }
    }
}

impl std::str::FromStr for CoordSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperboloid" => Ok(CoordSystem::Hyperboloid),
            "poincare" => Ok(CoordSystem::Poincare),
            "klein" => Ok(CoordSystem::Klein),
            other => Err(Error::Config(format!("unknown coordinate system {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub task: Task,
    pub coords: CoordSystem,
    pub geometry: GeometryKind,
    pub curvature: f64,
    pub strictness: Strictness,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            task: Task::Classification,
            coords: CoordSystem::Hyperboloid,
            geometry: GeometryKind::Hyperboloid,
            curvature: 1.0,
            strictness: Strictness::Lenient,
        }
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open_reader(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    Ok(if is_gz(path) {
        Box::new(GzDecoder::new(reader))
    } else {
        Box::new(reader)
    })
}

fn open_writer(path: &Path) -> Result<Box<dyn Write>> {
    let file = File::create(path).map_err(io_err(path))?;
    let writer = BufWriter::new(file);
    Ok(if is_gz(path) {
        Box::new(GzEncoder::new(writer, Compression::default()))
    } else {
        Box::new(writer)
    })
}

/// Reads a labeled CSV. Non-hyperboloid coordinates are converted to the
/// hyperboloid; with euclidean geometry the columns are used as-is.
pub fn load_dataset(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let (manifold, points, targets) = read_table(path, opts, true)?;
    Dataset::new(manifold, points, targets.expect("labels required"))
}

/// Like [`load_dataset`], but the `label` column is optional.
pub fn load_points(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<(ManifoldSpec, PointMatrix, Option<Targets>)> {
    read_table(path.as_ref(), opts, false)
}

fn read_table(
    path: &Path,
    opts: &LoadOptions,
    require_label: bool,
) -> Result<(ManifoldSpec, PointMatrix, Option<Targets>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open_reader(path)?);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .clone();
    let label_col = headers.iter().position(|h| h == "label");
    if require_label && label_col.is_none() {
        return Err(parse_err(path, "label column missing"));
    }
    let n_coords = headers.len() - usize::from(label_col.is_some());
    if n_coords == 0 {
        return Err(parse_err(path, "no coordinate columns"));
    }

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                format!("row {row}: expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_col {
                match opts.task {
                    Task::Classification => labels.push(field.parse::<i64>().map_err(|_| {
                        parse_err(path, format!("row {row}: invalid class label {field:?}"))
                    })?),
                    Task::Regression => values.push(field.parse::<f64>().map_err(|_| {
                        parse_err(path, format!("row {row}: invalid target {field:?}"))
                    })?),
                }
            } else {
                let v = field.parse::<f64>().map_err(|_| {
                    parse_err(path, format!("row {row}: invalid coordinate {field:?}"))
                })?;
                if v.is_nan() {
                    return Err(Error::NanCoordinate(row));
                }
                raw.push(v);
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::Empty("dataset file has no rows"));
    }

    let targets = label_col.map(|_| match opts.task {
        Task::Classification => Targets::from_labels(&labels),
        Task::Regression => Targets::Values(values),
    });
    let raw = PointMatrix::from_flat(raw, n_coords)?;

    let (manifold, points) = match (opts.geometry, opts.coords) {
        (GeometryKind::Euclidean, CoordSystem::Hyperboloid) => {
            (ManifoldSpec::euclidean(n_coords)?, raw)
        }
        (GeometryKind::Euclidean, other) => {
            return Err(Error::Config(format!(
                "{other:?} coordinates require hyperboloid geometry"
            )))
        }
        (GeometryKind::Hyperboloid, CoordSystem::Hyperboloid) => {
            if n_coords < 2 {
                return Err(parse_err(path, "hyperboloid data needs at least 2 coordinates"));
            }
            (ManifoldSpec::hyperboloid(n_coords - 1, opts.curvature)?, raw)
        }
        (GeometryKind::Hyperboloid, coords) => {
            let m = ManifoldSpec::hyperboloid(n_coords, opts.curvature)?;
            let mut pts = PointMatrix::new(n_coords + 1);
            for (i, row) in raw.rows().enumerate() {
                let x = match coords {
                    CoordSystem::Poincare => from_poincare(row, &m),
                    CoordSystem::Klein => from_klein(row, &m),
                    CoordSystem::Hyperboloid => unreachable!(),
                }
                .map_err(|e| e.at_row(i))?;
                pts.push_row(&x)?;
            }
            (m, pts)
        }
    };
    for (i, row) in points.rows().enumerate() {
        manifold
            .check_point(row, opts.strictness)
            .map_err(|e| match e {
                Error::NanCoordinate(_) => Error::NanCoordinate(i),
                e => e.at_row(i),
            })?;
    }
    Ok((manifold, points, targets))
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    save_dataset_as(ds, path, CoordSystem::Hyperboloid)
}

/// Writes `ds` with its coordinates expressed in `coords`.
pub fn save_dataset_as(ds: &Dataset, path: impl AsRef<Path>, coords: CoordSystem) -> Result<()> {
    let path = path.as_ref();
    if coords != CoordSystem::Hyperboloid && !ds.manifold.is_hyperboloid() {
        return Err(Error::Config(
            "only hyperboloid datasets can be written in disk coordinates".into(),
        ));
    }
    let n_cols = match coords {
        CoordSystem::Hyperboloid => ds.points.cols(),
        _ => ds.manifold.dim,
    };
    let first = usize::from(coords != CoordSystem::Hyperboloid);
    let mut writer = csv::Writer::from_writer(open_writer(path)?);
    let prefix = coords.column_prefix();
    let mut header = vec!["label".to_string()];
    header.extend((first..first + n_cols).map(|i| format!("{prefix}{i}")));
    let csv_err = |e: csv::Error| Error::Parse {
        path: PathBuf::from(path),
        message: e.to_string(),
    };
    writer.write_record(&header).map_err(csv_err)?;

    let mut record: Vec<String> = Vec::with_capacity(n_cols + 1);
    for (i, row) in ds.points.rows().enumerate() {
        record.clear();
        record.push(match &ds.targets {
            Targets::Classes { ids, vocabulary } => vocabulary[ids[i]].to_string(),
            Targets::Values(v) => v[i].to_string(),
        });
        let converted;
        let coords_row: &[f64] = match coords {
            CoordSystem::Hyperboloid => row,
            CoordSystem::Poincare => {
                converted = to_poincare(row, &ds.manifold).map_err(|e| e.at_row(i))?;
                &converted
            }
            CoordSystem::Klein => {
                converted = to_klein(row, &ds.manifold).map_err(|e| e.at_row(i))?;
                &converted
            }
        };
        record.extend(coords_row.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(csv_err)?;
    }
    let inner = writer
        .into_inner()
        .map_err(|e| parse_err(path, e.to_string()))?;
    finish(inner, path)
}

fn finish(mut w: Box<dyn Write>, path: &Path) -> Result<()> {
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_gaussian_mixture, GaussianMixtureSpec};

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn round_trip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample_gaussian_mixture(
            &GaussianMixtureSpec {
                n_classes: 3,
                dim: 3,
                curvature: 0.5,
                seed: 2,
                ..Default::default()
            },
            150,
        )
        .unwrap();
        let opts = LoadOptions {
            curvature: 0.5,
            ..Default::default()
        };
        for name in ["d.csv", "d.csv.gz"] {
            let p = dir.path().join(name);
            save_dataset(&ds, &p).unwrap();
            assert_eq!(load_dataset(&p, &opts).unwrap(), ds);
        }
    }

    #[test]
    fn hand_written_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let t = 0.5f64;
        let body = format!(
            "label,x0,x1,x2\n0,1,0,0\n4,{},{},0\n4,{},0,{}\n",
            t.cosh(),
            t.sinh(),
            t.cosh(),
            -t.sinh()
        );
        let p = write(&dir, "h.csv", &body);
        let ds = load_dataset(&p, &LoadOptions::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.manifold.dim, 2);
    }

    #[test]
    fn poincare_boundary_row_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "label,p1,p2\n0,0.1,0.2\n1,0.6,0.8\n");
        let opts = LoadOptions {
            coords: CoordSystem::Poincare,
            ..Default::default()
        };
        match load_dataset(&p, &opts) {
            Err(Error::OutsideDisk { row: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_manifold_and_missing_label() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "o.csv", "label,x0,x1\n0,1,0\n1,2,0\n");
        match load_dataset(&p, &LoadOptions::default()) {
            Err(Error::OffManifold { row: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let p = write(&dir, "n.csv", "y,x0,x1\n0,1,0\n");
        assert!(matches!(
            load_dataset(&p, &LoadOptions::default()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn euclidean_geometry_keeps_raw_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.csv", "label,x0,x1\n0,2,0\n1,3,1\n");
        let opts = LoadOptions {
            geometry: GeometryKind::Euclidean,
            ..Default::default()
        };
        let ds = load_dataset(&p, &opts).unwrap();
        assert_eq!(ds.manifold.dim, 2);
        assert_eq!(ds.points.row(1), &[3.0, 1.0]);
    }
}
