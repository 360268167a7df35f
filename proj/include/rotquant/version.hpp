#pragma once

#define ROTQUANT_VERSION "0.1.0"
