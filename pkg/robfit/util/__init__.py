#  Copyright (c) 2021 robfit
