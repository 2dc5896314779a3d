//! Benchmark fixtures shared by the criterion targets.

use ergostab_core::landscapes::{make_dataset, Activation, LossKind, SyntheticDataset, Teacher, TeacherKind, ToyNet};

/// The desk-scale corrupted-label task: 64 samples in 5 dimensions and a
/// 16-unit tanh network.
pub fn toy_task(p: f64) -> (SyntheticDataset, ToyNet) {
    let teacher = Teacher::random(TeacherKind::Logistic { temperature: 0.0 }, 5, 1);
    let ds = make_dataset(64, 5, p, teacher, 7).expect("valid parameters");
    (ds, ToyNet::new(5, 16, Activation::Tanh, LossKind::Logistic))
}
