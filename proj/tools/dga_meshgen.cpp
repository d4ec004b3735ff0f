/*
 * Writes the structured mesh described by the "mesh": {"box": ...} section
 * of a config to a mesh file, for inspection or reuse as "mesh": "<path>".
 */
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dga/config.hpp"
#include "dga/meshgen.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Generate a structured tetrahedral box mesh"};
    std::string config, out;
    app.add_option("config", config)->required();
    app.add_option("mesh", out, "output mesh file")->required();
    CLI11_PARSE(app, argc, argv);
    try
    {
        auto cfg = dga::load_config(config);
        if (!cfg.mesh_box)
            throw dga::config_error("config has no 'mesh.box' section");
        auto msh = dga::generate_box_mesh(*cfg.mesh_box);
        std::ofstream os(out);
        if (!os)
            throw dga::config_error("cannot write '" + out + "'");
        dga::write_mesh(os, msh);
        std::cout << msh.num_nodes() << " nodes, " << msh.num_tets() << " tets\n";
        return 0;
    }
    catch (const dga::config_error& e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
}
