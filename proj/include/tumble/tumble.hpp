#ifndef TUMBLE_TUMBLE_HPP
#define TUMBLE_TUMBLE_HPP

#include "tumble/config.hpp"
#include "tumble/error.hpp"
#include "tumble/evaluation.hpp"
#include "tumble/filters.hpp"
#include "tumble/geom.hpp"
#include "tumble/motion.hpp"
#include "tumble/pipeline.hpp"
#include "tumble/plane.hpp"
#include "tumble/ply.hpp"
#include "tumble/point_cloud.hpp"
#include "tumble/reconstruction.hpp"
#include "tumble/rigid_body.hpp"
#include "tumble/shape_completion.hpp"
#include "tumble/sine_fit.hpp"
#include "tumble/text_io.hpp"
#include "tumble/trajectory.hpp"

#endif  // TUMBLE_TUMBLE_HPP
