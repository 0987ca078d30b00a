// Writes the built-in reference parameter sets and the default cost profile as JSON.
#include <cstdio>
#include <filesystem>

#include "gazeval/cost.hpp"
#include "gazeval/params.hpp"
#include "gazeval/reference_params.hpp"

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data");
    fs::create_directories(root / "params");
    fs::create_directories(root / "profiles");
    for (const auto* set : {&gazeval::individual_fits(), &gazeval::shared_phi_fits()}) {
        for (const auto& m : *set) gazeval::save_params(m.params, root / "params" / (m.id + ".json"));
    }
    gazeval::save_profile(gazeval::default_cost_profile(), root / "profiles" / "default.json");
    std::printf("wrote %s\n", root.string().c_str());
}
