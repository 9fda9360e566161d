/// Six significant digits, `%g`-style choice between fixed and exponent
/// notation, trailing zeros kept so columns line up.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade (999999.5 → 1.00000e6)
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) { exp + 1 } else { exp };
    if (-5..6).contains(&exp) {
        format!("{x:.*}", (5 - exp) as usize)
    } else {
        format!("{x:.5e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn fixed_and_exponent_ranges() {
        assert_eq!(sig6(100.0), "100.000");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(-1.5), "-1.50000");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(1.0e-7), "1.00000e-7");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(f64::NAN), "NaN");
    }
}
