#pragma once

#include "qbell/box.hpp"
#include "qbell/box_io.hpp"
#include "qbell/certificate.hpp"
#include "qbell/chain.hpp"
#include "qbell/exclusion.hpp"
#include "qbell/faces.hpp"
#include "qbell/graph.hpp"
#include "qbell/linalg.hpp"
#include "qbell/lp.hpp"
#include "qbell/report.hpp"
#include "qbell/scalar.hpp"
#include "qbell/sdp.hpp"
#include "qbell/selftest.hpp"
#include "qbell/templates.hpp"
#include "qbell/xor_games.hpp"
