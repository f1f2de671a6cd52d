# el-sched taskset v1
1 0 5 5
2 1 16 16
