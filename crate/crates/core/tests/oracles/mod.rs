//! Independent reference implementations used only by tests.

#![allow(dead_code)]

pub mod hs;
pub mod maxmin;
pub mod qp;
pub mod sdp_generic;
pub mod simplex;
