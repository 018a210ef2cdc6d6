//! Parsing of measure spec strings. Group specs parse through
//! [`GroupModel`]'s `FromStr`, representation specs through
//! [`crate::repr::UnitaryRep::parse_spec`].

use crate::error::{Error, Result};
use crate::groups::GroupModel;
use crate::measures::Measure;

/// `lazy[:alpha]` (default `alpha = 1/2`) or `uniform-with-hold`.
pub fn parse_measure(model: &GroupModel, spec: &str) -> Result<Measure> {
    let spec = spec.trim();
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "lazy" => {
            let alpha = if rest.is_empty() {
                0.5
            } else {
                rest.parse::<f64>()
                    .map_err(|_| Error::parse("measure", format!("bad hold probability {rest:?}")))?
            };
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::parse(
                    "measure",
                    format!("hold probability must lie in (0, 1), got {alpha}"),
                ));
            }
            Measure::lazy(model, alpha)
        }
        "uniform-with-hold" if rest.is_empty() => Ok(Measure::uniform_with_hold(model)),
        _ => Err(Error::parse(
            "measure",
            format!("unknown measure {spec:?} (expected lazy[:alpha] or uniform-with-hold)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupElement;

    #[test]
    fn measure_specs() {
        let z = GroupModel::FreeAbelian(1);
        let m = parse_measure(&z, "lazy:0.5").unwrap();
        assert_eq!(m.mass_at(&GroupElement::Vector(vec![1])), 0.25);
        assert_eq!(parse_measure(&z, "lazy").unwrap().mass_at(&GroupElement::Vector(vec![0])), 0.5);
        let f = GroupModel::Free(2);
        let m = parse_measure(&f, "uniform-with-hold").unwrap();
        assert!((m.mass_at(&f.identity()) - 0.2).abs() < 1e-15);
        for bad in ["lazy:0", "lazy:1.5", "lazy:x", "uniform", "nosuch"] {
            assert!(matches!(parse_measure(&z, bad), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
