pub mod calendar;
pub mod comms;
pub mod courses;
pub mod error;
pub mod map;
pub mod reservation;
pub mod time;
pub mod world;
pub mod agent;
pub mod task;
pub mod dataset;
pub mod tools;
pub mod evaluation;
pub mod controller;
