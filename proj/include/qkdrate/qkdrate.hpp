#pragma once

#include "qkdrate/cv_protocol.hpp"
#include "qkdrate/dv_protocols.hpp"
#include "qkdrate/errors.hpp"
#include "qkdrate/gaussian.hpp"
#include "qkdrate/info_measures.hpp"
#include "qkdrate/normal.hpp"
#include "qkdrate/oracles.hpp"
#include "qkdrate/run.hpp"
#include "qkdrate/second_order.hpp"
#include "qkdrate/verify.hpp"
