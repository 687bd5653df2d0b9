#pragma once

#include "primscene/dataset.hpp"
#include "primscene/integration.hpp"

#include <cstdint>
#include <vector>

namespace primscene {

struct SynthOptions {
    int frames = 303;
    int width = 192;
    int height = 144;
    double focal = 160.0;
    std::uint32_t seed = 7;
    int render_workers = 4;
};

/// Closed 6 x 2.8 x 6 room with two pieces of furniture, vertex-colored.
std::vector<TriMesh> synth_room_meshes();

/// Renders the room from `frames` cameras circling the middle of the room at
/// jittered heights, all looking roughly at the room center.
NerfDataset synth_room_dataset(const SynthOptions& options = {});

/// Sofa (box), lamp (cylinder) and bed (box) placements inside the room. The
/// lamp stands next to the sofa so their silhouettes overlap in some views.
std::vector<ObjectSpec> demo_objects(InsertStrategy strategy = InsertStrategy::AddNewImages);

}  // namespace primscene
