use cct_core::io::{
    read_grid, read_markers, read_mask, write_grid, write_markers, write_mask, GridFormat,
};
use cct_core::{Error, Geometry, MaskGrid, ScalarGrid};

fn ramp(shape: &[usize], scale: f64) -> ScalarGrid {
    let n: usize = shape.iter().product();
    ScalarGrid::from_shape_vec(
        shape,
        (0..n).map(|i| (i as f64 * scale) % 65535.0).collect(),
    )
    .unwrap()
}

#[test]
fn pgm_round_trip_8_bit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    let g = ramp(&[9, 31], 1.0).map(|v| v % 256.0);
    write_grid(&g, &p, None).unwrap();
    assert_eq!(read_grid(&p, None).unwrap(), g);
}

#[test]
fn pgm_round_trip_16_bit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    let g = ramp(&[7, 13], 401.0);
    assert!(g.max() > 255.0);
    write_grid(&g, &p, None).unwrap();
    assert_eq!(read_grid(&p, None).unwrap(), g);
}

#[test]
fn pgm_rounds_and_clamps() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    let g = ScalarGrid::from_shape_vec(&[1, 4], vec![-3.0, 1.4, 1.6, 255.2]).unwrap();
    write_grid(&g, &p, None).unwrap();
    assert_eq!(
        read_grid(&p, None).unwrap().values(),
        &[0.0, 1.0, 2.0, 255.0]
    );
}

#[test]
fn pgm_rejects_other_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    assert!(matches!(
        write_grid(&ramp(&[2, 2, 2], 1.0), &p, None),
        Err(Error::Format { .. })
    ));
}

#[test]
fn csv_round_trip_keeps_every_bit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.csv");
    let g = ScalarGrid::from_shape_vec(&[2, 3], vec![0.1, -1.0 / 3.0, 1e-310, 2.5e300, -0.0, 7.0])
        .unwrap();
    write_grid(&g, &p, None).unwrap();
    let back = read_grid(&p, None).unwrap();
    for (a, b) in back.values().iter().zip(g.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn csv_one_dimensional_reads_as_a_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.csv");
    write_grid(&ramp(&[5], 1.0), &p, None).unwrap();
    assert_eq!(read_grid(&p, None).unwrap().shape(), &[1, 5]);
}

#[test]
fn csv_ragged_rows_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.csv");
    std::fs::write(&p, "1,2,3\n4,5\n").unwrap();
    assert!(matches!(read_grid(&p, None), Err(Error::Format { .. })));
    std::fs::write(&p, "1,x\n").unwrap();
    assert!(matches!(read_grid(&p, None), Err(Error::Format { .. })));
}

#[test]
fn fgrid_keeps_three_dimensional_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.fgrid");
    let geom = Geometry::new(vec![3, 4, 2], vec![0.5, 0.25, 2.0], vec![-1.0, 0.125, 3.0]).unwrap();
    let g = ScalarGrid::from_fn(geom, |x| x[0] * x[1] - x[2]).unwrap();
    write_grid(&g, &p, None).unwrap();
    assert_eq!(read_grid(&p, None).unwrap(), g);
}

#[test]
fn fgrid_truncated_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.fgrid");
    write_grid(&ramp(&[3, 3], 1.0), &p, None).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(read_grid(&p, None), Err(Error::Format { .. })));
}

#[test]
fn explicit_format_overrides_extension() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("grid.bin");
    let g = ramp(&[2, 2], 0.5);
    assert!(matches!(
        write_grid(&g, &p, None),
        Err(Error::Format { .. })
    ));
    write_grid(&g, &p, Some(GridFormat::Fgrid)).unwrap();
    assert_eq!(read_grid(&p, Some(GridFormat::Fgrid)).unwrap(), g);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        read_grid(dir.path().join("none.csv"), None),
        Err(Error::Io { .. })
    ));
}

#[test]
fn mask_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.pgm");
    let m = MaskGrid::from_index_fn(Geometry::unit(&[6, 5]).unwrap(), |i| {
        (i[0] * 3 + i[1]) % 4 == 0
    });
    write_mask(&m, &p, None, 255.0).unwrap();
    assert_eq!(read_mask(&p, None).unwrap(), m);
}

#[test]
fn markers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    let points = vec![vec![0, 4], vec![17, 2], vec![3, 3]];
    write_markers(&points, &p).unwrap();
    assert_eq!(read_markers(&p).unwrap(), points);
}
