use polyrep_core::labcli::{run_decomposition, ExperimentConfig};

#[test]
fn minor_pieces_are_smaller_than_the_major_model() {
    let cfg = ExperimentConfig::from_toml(
        "[experiment]\nphi = \"0,1\"\nj = 2\nepsilon = 0.05\nh_exponent = 0.8\n",
    )
    .unwrap();
    let r = run_decomposition(&cfg, 10_000).unwrap();
    let get = |c: &str| r.column(c).unwrap()[0];
    let major = get("major_re").hypot(get("major_im"));
    assert!(get("i2_re").hypot(get("i2_im")) < major);
    assert!(get("i3_re").hypot(get("i3_im")) < major);
    assert!(get("residual_decomp") <= get("quad_tol").max(1e-6 * get("full_circle")));
    assert!(get("residual_circle") <= 1e-8 * get("full_circle"));
}
