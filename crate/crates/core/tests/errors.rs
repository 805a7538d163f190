use charfun_core::charfun::CharacteristicData;
use charfun_core::fock::{FockError, TruncationParams, WordIndexer};
use charfun_core::numerics::real_matrix;
use charfun_core::tuple::{analyze, section7, validate, RowContraction, TupleError};
use charfun_core::Error;

#[test]
fn non_coisometric_tuple_is_rejected() {
    let half = real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.5]);
    let t = RowContraction::new(vec![half.clone(), half]).unwrap();
    let report = validate(&t, 1e-10);
    assert!(report.is_contraction && !report.is_coisometric);
    assert!(report.coisometry_defect > 0.4);
    assert!(matches!(analyze(t), Err(TupleError::NotCoisometric { .. })));
}

#[test]
fn direct_sum_is_not_ergodic() {
    let t = section7().direct_sum(&section7()).unwrap();
    assert!(validate(&t, 1e-10).is_coisometric);
    let err = analyze(t).unwrap_err();
    assert!(
        matches!(err, TupleError::NotErgodic { .. } | TupleError::NonUniqueVectorState { .. }),
        "{err:?}"
    );
}

#[test]
fn single_operator_is_rejected() {
    let id = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(RowContraction::new(vec![id]), Err(TupleError::DimensionMismatch(_))));
}

#[test]
fn mismatched_shapes_are_rejected() {
    let a = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let b = real_matrix(1, 1, &[1.0]);
    assert!(RowContraction::new(vec![a, b]).is_err());
}

#[test]
fn word_budget_is_enforced() {
    assert!(matches!(WordIndexer::with_budget(3, 20, 1_000), Err(FockError::BudgetExceeded { .. })));
    assert!(WordIndexer::new(3, 6).is_ok());
}

#[test]
fn errors_convert_into_crate_error() {
    let half = real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.5]);
    let t = RowContraction::new(vec![half.clone(), half]).unwrap();
    let run = || -> Result<CharacteristicData, Error> {
        let et = analyze(t)?;
        Ok(CharacteristicData::compute(et, TruncationParams::default())?)
    };
    assert!(matches!(run(), Err(Error::Tuple(_))));
}
