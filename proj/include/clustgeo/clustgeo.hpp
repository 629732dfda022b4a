#pragma once

#include "clustgeo/choice_alpha.hpp"
#include "clustgeo/condensed.hpp"
#include "clustgeo/dendrogram.hpp"
#include "clustgeo/dendrogram_io.hpp"
#include "clustgeo/dissim.hpp"
#include "clustgeo/dissim_io.hpp"
#include "clustgeo/error.hpp"
#include "clustgeo/geo_mixing.hpp"
#include "clustgeo/geojson.hpp"
#include "clustgeo/inertia.hpp"
#include "clustgeo/svg_chart.hpp"
#include "clustgeo/ward.hpp"
