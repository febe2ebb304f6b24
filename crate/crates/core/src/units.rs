//! dBm <-> watt conversions. Only the CLI boundary should need these.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_watts(-70.0) - 1e-10).abs() < 1e-24);
        assert!((watts_to_dbm(1.5) - 31.760912590556813).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        for dbm in [-70.0, -3.5, 0.0, 17.0, 40.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
    }
}
