# el-sched taskset v1
2 0 5 5
7 3 16 16
