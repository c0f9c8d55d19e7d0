#ifndef POLYDG_POLYDG_HPP
#define POLYDG_POLYDG_HPP

/// Convenience header pulling in the whole library.

#include <polydg/agglomerate.hpp>
#include <polydg/analysis.hpp>
#include <polydg/config.hpp>
#include <polydg/dgspace.hpp>
#include <polydg/forms.hpp>
#include <polydg/geometry.hpp>
#include <polydg/harness.hpp>
#include <polydg/manufactured.hpp>
#include <polydg/mesh.hpp>
#include <polydg/mesh_generate.hpp>
#include <polydg/model.hpp>
#include <polydg/quadrature.hpp>
#include <polydg/timestep.hpp>
#include <polydg/types.hpp>
#include <polydg/vtk.hpp>

#endif // POLYDG_POLYDG_HPP
