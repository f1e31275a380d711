#pragma once

#include <cstdint>
#include <string>

#include "spikehd/encoder.hpp"
#include "spikehd/lif.hpp"
#include "spikehd/memory.hpp"

namespace spikehd {

// Binary containers. All integers and doubles are little-endian; every file
// starts with a 4-byte magic and a u32 format version.

// Holds only (input_dim, dim, activation, seed); the basis is regenerated
// from the seed on load, so round trips are bit-exact.
void save_basis(const std::string& path, const EncoderBasis& basis);
EncoderBasis load_basis(const std::string& path);

// (k, dim, labels, row-major f64 rows).
void save_memory(const std::string& path, const ClassMemory& memory);
ClassMemory load_memory(const std::string& path);

// Shapes, seeds, neuron parameters and weight tensors; readouts are
// regenerated from their seeds since they are never trained.
void save_network(const std::string& path, const LifNetwork& network);
LifNetwork load_network(const std::string& path);

struct CheckpointMeta {
    std::uint8_t phase = 0;
    std::uint64_t injection_depth = 0;
    std::uint8_t pooling = 0;
    std::uint64_t config_hash = 0;
    std::string resolved_config;  // JSON text
};

struct Checkpoint {
    CheckpointMeta meta;
    LifNetwork network;
    EncoderBasis basis;
    ClassMemory memory;
};

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace spikehd
