//! Evolution-strategies training for hybrid quantum-classical networks on a
//! statevector simulator.
//!
//! The crate is layered: [`sim`] simulates circuits exactly, [`circuits`]
//! builds encoders and the layered Ry/CNOT ansatz, [`grad`] estimates
//! gradients (ES search gradient, parameter shift, finite differences),
//! [`nn`] provides the linear and quantum layer primitives with optimizers,
//! [`model`] wires layers into trainable models, [`mnist`] reads and writes
//! image data in the IDX format, and [`seed`] derives reproducible per-task
//! RNG seeds.

pub mod circuits;
pub mod grad;
pub mod mnist;
pub mod model;
pub mod nn;
pub mod seed;
pub mod sim;

pub use circuits::{
    build_ansatz, build_input1, build_input2, encode_dense_angle, encode_qubit,
    encode_wavefunction, AnsatzSpec, CircuitError, EncoderSpec,
};
pub use grad::{
    es_gradient, fd_gradient, gaussian_samples, log_derivative_mu, psr_gradient, rule_lambda,
    smoothed_objective, EsConfig, FnObjective, GradError, Objective,
};
pub use mnist::{
    ascii_render, image_to_features, make_binary_split, parse_idx_images, parse_idx_labels,
    pool_to_grid, pooled_samples, write_idx_images, write_idx_labels, DataError, Dataset, Grid,
    Sample,
};
pub use model::{
    argmax, build_model1, build_model2, effective_lambda, evaluate, forward_trace, model_backward,
    model_backward_seeded, model_forward, train, EsSampling, GradMode, Layer, LayerGrad, Model,
    RunHistory, TrainConfig, TrainError, TrainHistory, DEFAULT_SIGMA,
};
pub use nn::{
    linear_backward, linear_forward, mse_grad, mse_loss, optimizer_step, quantum_backward,
    quantum_backward_seeded, quantum_forward, quantum_psr_backward, Activation, LinearGrad,
    LinearLayer, Matrix, NnError, OptimizerKind, OptimizerState, QuantumLayer,
};
pub use sim::{run_circuit, CircuitOp, Observable, SimError, StateVector};
